use quadratik_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApiError {
    /// Malformed input table. `row` and `column` are 1-based positions in
    /// the file, counting a header line when present.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("cancelled")]
    Cancelled,
}

impl ApiError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::Parse { .. } => "parse_error",
            Self::InvalidParameter(_) => "invalid_parameter",
            Self::Compute(_) => "computation_error",
            Self::Cancelled => "cancelled",
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidParameter(msg.into())
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Cancelled => Self::Cancelled,
            CoreError::InvalidArgument(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::NotUnitNorm { .. }
            | CoreError::NotPositiveDefinite
            | CoreError::Unsupported(_) => Self::InvalidParameter(e.to_string()),
            CoreError::Degenerate(_) | CoreError::NoSignChange { .. } | CoreError::NonConvergence(_) => {
                Self::Compute(e.to_string())
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, ApiError>;
