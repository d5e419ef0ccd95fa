use std::path::PathBuf;

use clap::Args;
use netshift_core::align::AlignmentKind;
use netshift_core::embed::embed;
use netshift_core::seedfree::{run_seedfree_on, SeedFreeTrace};
use netshift_core::shift::{Comparison, ShiftReport};
use serde::Serialize;

use crate::args::{DimArgs, InputArgs, OutputArgs, SeedFreeArgs, SignatureJson};
use crate::error::{CliError, CliResult};
use crate::io::{json_bytes, matrix_rows, Outputs};
use crate::manifest::RunManifest;

/// Detect vertices whose latent positions differ between two networks.
#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// First network.
    #[arg(long)]
    pub a1: PathBuf,
    /// Second network.
    #[arg(long)]
    pub a2: PathBuf,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub dims: DimArgs,
    /// Known unshifted seed vertices, comma separated (0-indexed). Without
    /// seeds the seed-free search is used.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<usize>>,
    /// False discovery rate level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub seedfree: SeedFreeArgs,
    /// Also write shifts.csv.
    #[arg(long)]
    pub csv: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct AlignmentJson {
    kind: &'static str,
    seeds: Vec<usize>,
    condition: f64,
    w: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct SeedFreeJson {
    candidates: usize,
    passed_filter: usize,
    chosen_index: Option<usize>,
    chosen_seeds: Vec<usize>,
    chosen_h: usize,
    expanded_seed_count: usize,
    fell_back: bool,
}

impl From<&SeedFreeTrace> for SeedFreeJson {
    fn from(t: &SeedFreeTrace) -> Self {
        let chosen = t.chosen.map(|m| &t.candidates[m]);
        Self {
            candidates: t.candidates.len(),
            passed_filter: t.candidates.iter().filter(|c| c.passed_filter).count(),
            chosen_index: t.chosen,
            chosen_seeds: chosen.map(|c| c.seeds.clone()).unwrap_or_default(),
            chosen_h: chosen.map_or(0, |c| c.h),
            expanded_seed_count: t.expanded_seeds.len(),
            fell_back: t.fell_back,
        }
    }
}

#[derive(Serialize)]
struct CompareReport {
    schema: u32,
    manifest: RunManifest,
    n: usize,
    signature1: SignatureJson,
    signature2: SignatureJson,
    dof: usize,
    unshifted: Vec<usize>,
    shifted: Vec<usize>,
    t: Vec<f64>,
    p: Vec<f64>,
    yhat: Vec<Vec<f64>>,
    alignment: AlignmentJson,
    seed_free: Option<SeedFreeJson>,
}

fn kind_name(k: AlignmentKind) -> &'static str {
    match k {
        AlignmentKind::Orthogonal => "orthogonal",
        AlignmentKind::IndefiniteAvg => "indefinite_average",
        AlignmentKind::Rectangular => "rectangular",
    }
}

fn shifts_csv(r: &ShiftReport) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "vertex".to_string(),
        "t".into(),
        "p".into(),
        "shifted".into(),
    ];
    header.extend((0..r.yhat.ncols()).map(|c| format!("y{}", c + 1)));
    w.write_record(&header).map_err(crate::io::internal)?;
    let unshifted = r.is_unshifted();
    for k in 0..r.n() {
        let mut row = vec![
            k.to_string(),
            r.t[k].to_string(),
            r.p[k].to_string(),
            (!unshifted[k]).to_string(),
        ];
        row.extend(r.yhat.row(k).iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(crate::io::internal)?;
    }
    w.into_inner()
        .map_err(|e| crate::io::internal(e.into_error()))
}

pub fn run(args: &CompareArgs) -> CliResult<Outputs> {
    let g1 = args.input.load(&args.a1)?;
    let g2 = args.input.load(&args.a2)?;
    if g1.graph.n() != g2.graph.n() {
        return Err(CliError::input(format!(
            "networks have {} and {} vertices",
            g1.graph.n(),
            g2.graph.n()
        )));
    }
    let dims = args.dims.model_dims()?;
    let cfg = args.seedfree.config(dims, args.alpha);
    let mut manifest = args
        .dims
        .record(RunManifest::new("compare", None))
        .param("alpha", args.alpha)
        .input(&g1)
        .input(&g2);
    let n = g1.graph.n();
    match &args.seeds {
        Some(seeds) => manifest = manifest.param("seeds", seeds),
        None => {
            cfg.validate(n)?;
            manifest = args.seedfree.record(manifest, &cfg);
            manifest.rng_seed = Some(cfg.rng_seed);
        }
    }
    let cmp = Comparison::new(embed(&g1.graph, dims.sig1)?, embed(&g2.graph, dims.sig2)?)?;
    let (report, trace) = match &args.seeds {
        Some(seeds) => (cmp.run(seeds, args.alpha)?, None),
        None => {
            let (r, t) = run_seedfree_on(&cmp, &cfg)?;
            (r, Some(t))
        }
    };
    let json = CompareReport {
        schema: 1,
        manifest,
        n,
        signature1: dims.sig1.into(),
        signature2: dims.sig2.into(),
        dof: report.dof,
        unshifted: report.unshifted.clone(),
        shifted: report.shifted(),
        t: report.t.clone(),
        p: report.p.clone(),
        yhat: matrix_rows(&report.yhat),
        alignment: AlignmentJson {
            kind: kind_name(report.alignment.kind),
            seeds: report.alignment.seeds.clone(),
            condition: report.alignment.condition,
            w: matrix_rows(&report.alignment.w),
        },
        seed_free: trace.as_ref().map(SeedFreeJson::from),
    };
    let mut out = Outputs::default();
    out.add("report.json", json_bytes(&json)?);
    if args.csv {
        out.add("shifts.csv", shifts_csv(&report)?);
    }
    Ok(out)
}
