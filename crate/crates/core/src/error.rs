use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("tridiagonal pivot {pivot:e} at row {row} is not positive")]
    Pivot { row: usize, pivot: f64 },

    #[error("non-finite wall state for species index {species}")]
    NonFinite { species: usize },

    #[error("domain box for species index {species} is unbounded; cannot sample")]
    UnboundedDomain { species: usize },

    #[error("kinetics arity {kinetics} does not match {species} species")]
    Arity { kinetics: usize, species: usize },

    #[error(
        "NON_CONVERGED at step {step}: residual {last:e} after {} iterations",
        residuals.len()
    )]
    NonConverged {
        step: usize,
        last: f64,
        residuals: Vec<f64>,
    },

    #[error("invalid coupler settings: {0}")]
    Settings(String),

    #[error("invalid configuration:\n{0}")]
    InvalidConfig(ValidationReport),

    #[error("{0}")]
    Config(#[from] crate::io::config::ConfigErrors),

    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}
