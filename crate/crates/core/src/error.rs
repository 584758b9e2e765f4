use thiserror::Error;

/// Errors raised by the bound evaluators, optimizers and validators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible point: {0}")]
    Infeasible(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("quality {quality} lies beyond the truncated ladder (last jump point {last_jump})")]
    OutOfLadder { quality: f64, last_jump: f64 },

    #[error("independent computations disagree: {0}")]
    Inconsistent(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
