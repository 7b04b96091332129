//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by grid construction, simulation, quadrature and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("incomplete campaign: {0}")]
    IncompleteCampaign(String),
    #[error("budget exceeded: best relative error {best_delta:.3e} after {steps} steps")]
    BudgetExceeded { best_delta: f64, steps: usize },
    #[error("singular input: {0}")]
    Singular(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
