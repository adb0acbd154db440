//! Error type shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by matrix construction, imputation, solving and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Shapes of two operands do not conform.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A parameter is outside its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A value that must be finite is NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Metric evaluation is undefined for the given inputs.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// A dataset or file is malformed.
    #[error("data error: {0}")]
    Data(String),

    /// The SDP solver failed or detected infeasibility.
    #[error("solver failure: {0}")]
    Solver(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
