use netshift_core::Error as CoreError;

/// Failure of a command, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or malformed input, or invalid parameters (exit 2).
    #[error("{0:#}")]
    Input(anyhow::Error),
    /// Anything else (exit 1).
    #[error("{0:#}")]
    Internal(anyhow::Error),
}

impl CliError {
    pub fn input(msg: impl std::fmt::Display) -> Self {
        Self::Input(anyhow::anyhow!("{msg}"))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 2,
            Self::Internal(_) => 1,
        }
    }

    pub fn context(self, ctx: impl std::fmt::Display + Send + Sync + 'static) -> Self {
        match self {
            Self::Input(e) => Self::Input(e.context(ctx)),
            Self::Internal(e) => Self::Internal(e.context(ctx)),
        }
    }
}

fn is_input_error(e: &CoreError) -> bool {
    match e {
        CoreError::InvalidParameter(_)
        | CoreError::DimensionMismatch(_)
        | CoreError::InvalidGraph(_)
        | CoreError::ProbabilityOutOfRange { .. }
        | CoreError::RankDeficientBlocks(_)
        | CoreError::InsufficientEigenvalues { .. }
        | CoreError::DegenerateSeeds(_) => true,
        CoreError::PairFailed { source, .. } => is_input_error(source),
        _ => false,
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if is_input_error(&e) {
            Self::Input(e.into())
        } else {
            Self::Internal(e.into())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
