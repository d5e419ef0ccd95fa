use clap::{Args, ValueEnum};
use netshift_core::graph::{
    grdpg_reference_blocks, make_rank_mismatch_scenario, make_rdpg_scenario, make_sbm_scenario,
    sample_graph, sbm_reference_blocks, ShiftScenario,
};
use netshift_core::rng;
use serde::Serialize;

use crate::args::{OutputArgs, SignatureJson};
use crate::error::CliResult;
use crate::io::{json_bytes, matrix_rows, write_graph, GraphFormat, Outputs};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Random dot product graph with uniform latent rows.
    Rdpg,
    /// Three-block assortative block model with block switching.
    Sbm,
    /// Three-block model with one negative eigenvalue.
    Grdpg,
    /// Block model whose first network uses only two of the three blocks.
    Rankmix,
}

/// Sample a pair of networks with planted shifts and their ground truth.
#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    /// Number of vertices.
    #[arg(long)]
    pub n: usize,
    /// Latent dimension (rdpg only).
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Fraction of vertices that shift.
    #[arg(long, default_value_t = 0.5)]
    pub shift_frac: f64,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Format of the written graphs.
    #[arg(long, value_enum, default_value_t = GraphFormat::Mtx)]
    pub format: GraphFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct Truth {
    schema: u32,
    manifest: RunManifest,
    model: Model,
    n: usize,
    signature1: SignatureJson,
    signature2: SignatureJson,
    unshifted: Vec<usize>,
    shifted: Vec<usize>,
    w_true: Vec<Vec<f64>>,
    y_true: Vec<Vec<f64>>,
    x1: Vec<Vec<f64>>,
    x2: Vec<Vec<f64>>,
    blocks1: Option<Vec<usize>>,
    blocks2: Option<Vec<usize>>,
}

fn scenario(args: &SimulateArgs) -> CliResult<ShiftScenario> {
    let (n, f, seed) = (args.n, args.shift_frac, args.rng_seed);
    Ok(match args.model {
        Model::Rdpg => make_rdpg_scenario(n, args.dim, f, seed)?,
        Model::Sbm => make_sbm_scenario(n, &sbm_reference_blocks(), f, seed)?,
        Model::Grdpg => make_sbm_scenario(n, &grdpg_reference_blocks(), f, seed)?,
        Model::Rankmix => make_rank_mismatch_scenario(n, &sbm_reference_blocks(), f, seed)?,
    })
}

pub fn run(args: &SimulateArgs) -> CliResult<Outputs> {
    let s = scenario(args)?;
    let g1 = sample_graph(&s.model1, rng::derive(args.rng_seed, rng::GRAPH1))?;
    let g2 = sample_graph(&s.model2, rng::derive(args.rng_seed, rng::GRAPH2))?;
    let mut manifest = RunManifest::new("simulate", Some(args.rng_seed))
        .param("model", args.model)
        .param("n", args.n)
        .param("shift_frac", args.shift_frac)
        .param("format", args.format);
    if args.model == Model::Rdpg {
        manifest = manifest.param("dim", args.dim);
    }
    let (b1, b2) = s.blocks.clone().unzip();
    let truth = Truth {
        schema: 1,
        manifest,
        model: args.model,
        n: s.n(),
        signature1: s.model1.signature.into(),
        signature2: s.model2.signature.into(),
        unshifted: s.unshifted.clone(),
        shifted: s.shifted(),
        w_true: matrix_rows(&s.w_true),
        y_true: matrix_rows(&s.y_true),
        x1: matrix_rows(&s.model1.x),
        x2: matrix_rows(&s.model2.x),
        blocks1: b1,
        blocks2: b2,
    };
    let ext = args.format.extension();
    let mut out = Outputs::default();
    out.add(
        format!("graph1.{ext}"),
        write_graph(&g1, args.format).into_bytes(),
    );
    out.add(
        format!("graph2.{ext}"),
        write_graph(&g2, args.format).into_bytes(),
    );
    out.add("truth.json", json_bytes(&truth)?);
    Ok(out)
}
