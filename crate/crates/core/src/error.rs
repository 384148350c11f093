use thiserror::Error;

use crate::estimator::EstimateReport;

/// Errors produced by geometry primitives, solvers, estimators and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The input is well-formed but geometrically degenerate (rank deficiency,
    /// coincident points, epipole on a reference line, ...).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// A matrix expected to have rank 2 is numerically full rank.
    #[error("matrix is not rank 2: {0}")]
    Rank(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("step one failed: {0}")]
    StepOneFailure(String),

    /// Robust estimation could not produce an acceptable model. The best-effort
    /// report is attached when one exists.
    #[error("estimation failed: {reason}")]
    EstimationFailure {
        reason: String,
        report: Option<Box<EstimateReport>>,
    },

    #[error("scene generation failed: {0}")]
    GenerationFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn degenerate(msg: impl Into<String>) -> Error {
    Error::Degenerate(msg.into())
}
