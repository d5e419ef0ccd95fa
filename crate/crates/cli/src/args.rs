//! Argument groups shared by several commands.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use netshift_core::seedfree::{SamplingMode, SeedFreeConfig};
use netshift_core::shift::ModelDims;
use netshift_core::Signature;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::{load_graph, GraphFormat, LoadedGraph};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Input format; by default `.mtx` files are Matrix Market and anything
    /// else a tab-separated edge list.
    #[arg(long, value_enum)]
    pub format: Option<GraphFormat>,
    /// Vertex count for edge lists (required when high-index vertices are
    /// isolated).
    #[arg(long)]
    pub n: Option<usize>,
}

impl InputArgs {
    pub fn load(&self, path: &Path) -> CliResult<LoadedGraph> {
        load_graph(path, self.format, self.n)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Directory for output files (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DimArgs {
    /// Embedding dimension.
    #[arg(long)]
    pub dim: usize,
    /// How many of the `dim` dimensions carry negative eigenvalues.
    #[arg(long, default_value_t = 0)]
    pub neg_dim: usize,
    /// Dimension of the second network when the ranks differ (both
    /// networks must then be definite).
    #[arg(long)]
    pub dim2: Option<usize>,
}

impl DimArgs {
    pub fn model_dims(&self) -> CliResult<ModelDims> {
        if self.dim == 0 {
            return Err(CliError::input("--dim must be at least 1"));
        }
        if self.neg_dim > self.dim {
            return Err(CliError::input("--neg-dim cannot exceed --dim"));
        }
        match self.dim2 {
            None => Ok(ModelDims::signed(Signature::new(
                self.dim - self.neg_dim,
                self.neg_dim,
            ))),
            Some(d2) if self.neg_dim == 0 && d2 > 0 => Ok(ModelDims::ranks(self.dim, d2)),
            Some(_) => Err(CliError::input(
                "--dim2 needs a positive value and --neg-dim 0",
            )),
        }
    }

    pub fn record(&self, m: RunManifest) -> RunManifest {
        m.param("dim", self.dim)
            .param("neg_dim", self.neg_dim)
            .param("dim2", self.dim2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Uniform random subsets, screened by the pair filter.
    Uniform,
    /// Subsets grown inside the filter's feasibility mask.
    Feasible,
}

#[derive(Debug, Clone, Args)]
pub struct SeedFreeArgs {
    /// Number of candidate seed sets.
    #[arg(long, default_value_t = 1000)]
    pub candidates: usize,
    /// Size of each candidate seed set (default: the larger dimension).
    #[arg(long)]
    pub seed_size: Option<usize>,
    /// Significance level of the candidate filter.
    #[arg(long, default_value_t = 0.3)]
    pub filter_alpha: f64,
    /// Master seed for candidate sampling.
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    #[arg(long, value_enum, default_value_t = Sampling::Uniform)]
    pub sampling: Sampling,
}

impl SeedFreeArgs {
    pub fn config(&self, dims: ModelDims, alpha: f64) -> SeedFreeConfig {
        let base = SeedFreeConfig::new(dims);
        SeedFreeConfig {
            seed_size: self.seed_size.unwrap_or(base.seed_size),
            candidates: self.candidates,
            alpha,
            alpha_tilde: self.filter_alpha,
            rng_seed: self.rng_seed,
            sampling: match self.sampling {
                Sampling::Uniform => SamplingMode::UniformRandom,
                Sampling::Feasible => SamplingMode::FeasibleDirect,
            },
            ..base
        }
    }

    pub fn record(&self, m: RunManifest, cfg: &SeedFreeConfig) -> RunManifest {
        m.param("candidates", cfg.candidates)
            .param("seed_size", cfg.seed_size)
            .param("filter_alpha", cfg.alpha_tilde)
            .param("sampling", self.sampling)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SignatureJson {
    pub d_plus: usize,
    pub d_minus: usize,
}

impl From<Signature> for SignatureJson {
    fn from(s: Signature) -> Self {
        Self {
            d_plus: s.d_plus,
            d_minus: s.d_minus,
        }
    }
}
