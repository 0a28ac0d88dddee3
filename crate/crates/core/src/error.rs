//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model operations and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Internal state is inconsistent with the requested operation.
    #[error("state error: {0}")]
    State(String),

    /// Calibration could not bracket the target within the search range.
    /// Carries the profit values observed at the bracket endpoints.
    #[error("calibration error: target {target} unreachable in c ∈ [0, {c_max}] (profit range [{at_zero}, {at_max}])")]
    Calibration {
        target: f64,
        c_max: f64,
        at_zero: f64,
        at_max: f64,
    },

    /// A least-squares fit failed; names the offending columns.
    #[error("fit error: {0}")]
    Fit(String),

    /// A file could not be read, written, or parsed at the container level.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed CSV input.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// Malformed JSON input.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn state(msg: impl Into<String>) -> Self {
        Error::State(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
