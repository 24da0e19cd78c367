use thiserror::Error;

/// Errors raised by the numeric routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("bracket [{lo}, {hi}] does not contain a sign change")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("row {row} is not unit norm (norm {norm})")]
    NotUnitNorm { row: usize, norm: f64 },
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("unsupported method: {0}")]
    Unsupported(String),
    #[error("computation cancelled")]
    Cancelled,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
