use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("argument outside domain: {0}")]
    Domain(String),

    /// The prior covariance is not trace class (requires alpha > 1).
    #[error("covariance is not trace class: alpha = {alpha} (need alpha > 1)")]
    NonTraceClass { alpha: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}
