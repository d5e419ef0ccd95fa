use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use netshift_core::embed::{embed, scree, select_dimension, signature_from_scree};
use netshift_core::Signature;
use serde::Serialize;

use crate::args::{InputArgs, OutputArgs, SignatureJson};
use crate::error::{CliError, CliResult};
use crate::io::{json_bytes, matrix_csv, Outputs};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum DimChoice {
    Fixed(usize),
    #[serde(serialize_with = "auto_str")]
    Auto,
}

fn auto_str<S: serde::Serializer>(s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str("auto")
}

impl FromStr for DimChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self::Auto);
        }
        match s.parse::<usize>() {
            Ok(d) if d > 0 => Ok(Self::Fixed(d)),
            _ => Err(format!("expected a positive integer or `auto`, got {s:?}")),
        }
    }
}

/// Adjacency spectral embedding of one network.
#[derive(Debug, Clone, Args)]
pub struct EmbedArgs {
    /// Network file.
    pub graph: PathBuf,
    #[command(flatten)]
    pub input: InputArgs,
    /// Embedding dimension, or `auto` to pick it from the scree plot.
    #[arg(long)]
    pub dim: DimChoice,
    /// Negative-eigenvalue dimensions (fixed dimension only; `auto` reads
    /// the signs from the spectrum).
    #[arg(long, default_value_t = 0)]
    pub neg_dim: usize,
    /// Largest dimension considered by `auto`.
    #[arg(long, default_value_t = 10)]
    pub max_dim: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct EmbedReport {
    schema: u32,
    manifest: RunManifest,
    n: usize,
    signature: SignatureJson,
    selected_dim: Option<usize>,
    scree: Option<Vec<f64>>,
    eigenvalues: Vec<f64>,
}

pub fn run(args: &EmbedArgs) -> CliResult<Outputs> {
    let g = args.input.load(&args.graph)?;
    let n = g.graph.n();
    let (sig, selected, scree_top) = match args.dim {
        DimChoice::Fixed(d) => {
            if args.neg_dim > d {
                return Err(CliError::input("--neg-dim cannot exceed --dim"));
            }
            (Signature::new(d - args.neg_dim, args.neg_dim), None, None)
        }
        DimChoice::Auto => {
            if args.max_dim == 0 {
                return Err(CliError::input("--max-dim must be at least 1"));
            }
            let values = scree(&g.graph);
            let top: Vec<f64> = values
                .iter()
                .take((args.max_dim + 1).min(n))
                .copied()
                .collect();
            let d = select_dimension(&top, args.max_dim);
            (signature_from_scree(&values, d), Some(d), Some(top))
        }
    };
    let e = embed(&g.graph, sig)?;
    let manifest = RunManifest::new("embed", None)
        .param("dim", args.dim)
        .param("neg_dim", args.neg_dim)
        .param("max_dim", args.max_dim)
        .input(&g);
    let report = EmbedReport {
        schema: 1,
        manifest,
        n,
        signature: sig.into(),
        selected_dim: selected,
        scree: scree_top,
        eigenvalues: e.eigvals.clone(),
    };
    let header: Vec<String> = (1..=e.dim()).map(|c| format!("x{c}")).collect();
    let eig = netshift_core::Matrix::from_column_slice(e.eigvals.len(), 1, &e.eigvals);
    let mut out = Outputs::default();
    out.add("embed.json", json_bytes(&report)?);
    out.add("embedding.csv", matrix_csv(&header, &e.xhat)?);
    out.add(
        "eigenvalues.csv",
        matrix_csv(&["eigenvalue".to_string()], &eig)?,
    );
    Ok(out)
}
