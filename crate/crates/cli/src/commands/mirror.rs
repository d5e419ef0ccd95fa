use std::path::PathBuf;

use clap::Args;
use netshift_core::mirror::{MirrorCurve, PairwiseComparisons};

use serde::Serialize;

use crate::args::{DimArgs, InputArgs, OutputArgs, SeedFreeArgs};
use crate::error::{CliError, CliResult};
use crate::io::{json_bytes, matrix_rows, Outputs};
use crate::manifest::RunManifest;

/// Mirror of a sequence of network snapshots.
#[derive(Debug, Clone, Args)]
pub struct MirrorArgs {
    /// Snapshot files in time order (at least two).
    #[arg(required = true, num_args = 2..)]
    pub graphs: Vec<PathBuf>,
    /// Snapshot labels, comma separated (default: file stems).
    #[arg(long, value_delimiter = ',')]
    pub labels: Option<Vec<String>>,
    /// Use the shift of this vertex instead of the fraction of shifted
    /// vertices as the distance between snapshots.
    #[arg(long)]
    pub vertex: Option<usize>,
    /// Dimension of the scaled mirror points.
    #[arg(long, default_value_t = 2)]
    pub mirror_dim: usize,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub dims: DimArgs,
    /// False discovery rate level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub seedfree: SeedFreeArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct MirrorReport {
    schema: u32,
    manifest: RunManifest,
    mode: &'static str,
    vertex: Option<usize>,
    labels: Vec<String>,
    d: Vec<Vec<f64>>,
    points: Vec<Vec<f64>>,
    iso: Vec<f64>,
}

pub fn run(args: &MirrorArgs) -> CliResult<Outputs> {
    let loaded = args
        .graphs
        .iter()
        .map(|p| args.input.load(p))
        .collect::<CliResult<Vec<_>>>()?;
    let n = loaded[0].graph.n();
    if let Some(bad) = loaded.iter().find(|g| g.graph.n() != n) {
        return Err(CliError::input(format!(
            "{} has {} vertices, expected {n}",
            bad.path.display(),
            bad.graph.n()
        )));
    }
    let labels = match &args.labels {
        Some(l) if l.len() != loaded.len() => {
            return Err(CliError::input(format!(
                "{} labels for {} snapshots",
                l.len(),
                loaded.len()
            )))
        }
        Some(l) => l.clone(),
        None => args
            .graphs
            .iter()
            .map(|p| {
                p.file_stem()
                    .map_or_else(String::new, |s| s.to_string_lossy().into_owned())
            })
            .collect(),
    };
    if let Some(k) = args.vertex {
        if k >= n {
            return Err(CliError::input(format!(
                "vertex {k} out of range for {n} vertices"
            )));
        }
    }
    if args.mirror_dim == 0 {
        return Err(CliError::input("--mirror-dim must be at least 1"));
    }
    let dims = args.dims.model_dims()?;
    let cfg = args.seedfree.config(dims, args.alpha);
    cfg.validate(n)?;
    let mut manifest = args
        .seedfree
        .record(
            args.dims
                .record(RunManifest::new("mirror", Some(cfg.rng_seed))),
            &cfg,
        )
        .param("alpha", args.alpha)
        .param("vertex", args.vertex)
        .param("mirror_dim", args.mirror_dim)
        .param("labels", &labels);
    for g in &loaded {
        manifest = manifest.input(g);
    }
    let graphs: Vec<_> = loaded.into_iter().map(|g| g.graph).collect();
    let pairs = PairwiseComparisons::run(&graphs, &cfg)?;
    let d = match args.vertex {
        Some(k) => pairs.vertex_distances(k)?,
        None => pairs.network_distances(),
    };
    let r = args.mirror_dim.min(graphs.len());
    let curve = MirrorCurve::from_distances(d, r, labels)?;
    let report = MirrorReport {
        schema: 1,
        manifest,
        mode: if args.vertex.is_some() {
            "vertex"
        } else {
            "network"
        },
        vertex: args.vertex,
        labels: curve.labels,
        d: matrix_rows(&curve.d),
        points: matrix_rows(&curve.points),
        iso: curve.iso,
    };
    let mut out = Outputs::default();
    out.add("mirror.json", json_bytes(&report)?);
    Ok(out)
}
