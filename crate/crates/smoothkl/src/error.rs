//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by validation, divergence evaluation, quadrature, and fitting.
#[derive(Debug, Error)]
pub enum Error {
    /// A smoothing level outside `[0, 1) ∪ (1, K/(K-1)]`, or a class count below 2.
    #[error("invalid smoothing level: alpha = {alpha}, k = {k} ({reason})")]
    InvalidSmoothingLevel {
        alpha: f64,
        k: usize,
        reason: &'static str,
    },

    /// A vector whose length does not match the expected class or feature count.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A vector that fails the membership test for its domain.
    #[error("invalid {kind} vector at component {index}: value {value}")]
    InvalidVector {
        kind: &'static str,
        index: usize,
        value: f64,
    },

    /// A logarithm argument that is zero or negative where positivity is required.
    #[error("log-domain violation at component {index}: argument {value} is not positive")]
    LogDomain { index: usize, value: f64 },

    /// Degenerate input for which the requested quantity is undefined.
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    /// An operation that is not defined for the given loss family.
    #[error("unsupported loss family: {0}")]
    UnsupportedLoss(String),

    /// A parameter outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A matrix that could not be factored as symmetric positive definite.
    #[error("singular or indefinite matrix: {0}")]
    SingularMatrix(String),

    /// Every optimization start failed with non-finite losses.
    #[error("optimization failed: {0}")]
    OptimizationFailed(String),

    /// Malformed CSV input.
    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
