//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Ill-formed model specification (bad term references, duplicate names, ...).
    #[error("invalid model specification: {0}")]
    ModelSpec(String),

    /// Text-format parse failure, carrying the 1-based line number.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Dataset-level violation located at a 0-based observation row.
    #[error("data error at row {row}: {message}")]
    Data { row: usize, message: String },

    /// Numerical failure while evaluating the likelihood at a given row.
    #[error("evaluation error at row {row}: {message}")]
    Evaluation { row: usize, message: String },

    /// Invalid run or suite configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The line search was handed a direction with non-negative slope.
    #[error("line search requires a descent direction (directional derivative {slope:e} >= 0)")]
    NonDescentDirection { slope: f64 },

    /// Every trial step produced a non-finite objective value.
    #[error("line search failed: all trial points were non-finite")]
    NonFiniteLineSearch,

    /// Optimizer-level failure that is not a plain non-convergence.
    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
