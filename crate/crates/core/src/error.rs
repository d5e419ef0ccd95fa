use alloc::boxed::Box;
use alloc::string::String;

use crate::seedfree::SeedFreeTrace;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("probability {value} at ({row}, {col}) lies outside [0, 1]")]
    ProbabilityOutOfRange { row: usize, col: usize, value: f64 },

    #[error("block matrix is rank deficient (eigenvalue magnitude {0:e})")]
    RankDeficientBlocks(f64),

    #[error("eigensolver did not converge after {0} iterations")]
    EigenNonConvergence(usize),

    #[error(
        "requested {requested_positive} positive and {requested_negative} negative eigenvalues, \
         found {available_positive} positive and {available_negative} negative"
    )]
    InsufficientEigenvalues {
        requested_positive: usize,
        requested_negative: usize,
        available_positive: usize,
        available_negative: usize,
    },

    #[error("degenerate seed set: {0}")]
    DegenerateSeeds(String),

    #[error("singular embedding: {0}")]
    SingularEmbedding(String),

    #[error("no candidate seed set passed the filter ({} candidates examined)", .0.candidates.len())]
    NoViableCandidate(Box<SeedFreeTrace>),

    #[error("comparison of snapshots {i} and {j} failed: {source}")]
    PairFailed {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },
}
