//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Unknown catalog label; carries the list of valid labels.
    #[error("unknown scheme label `{label}`; valid labels: {}", valid.join(", "))]
    UnknownScheme { label: String, valid: Vec<String> },

    /// A physical or numerical parameter is out of its admissible range.
    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// Inputs defined on incompatible grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Non-finite value produced while stepping; carries the first offending node.
    #[error("solver instability: non-finite {field} at z index {z_index}, tau index {t_index}")]
    SolverInstability {
        field: &'static str,
        z_index: usize,
        t_index: usize,
    },

    /// Retrieval ratio undefined because the stored spin wave is empty.
    #[error("retrieval efficiency undefined: storage efficiency {eta_s:.3e} below threshold")]
    RetrievalUndefined { eta_s: f64 },

    /// Line search exhausted its geometric backoff budget.
    #[error("line search stagnated at iteration {iteration} (eta_tot = {eta_tot:.6})")]
    Stagnation { iteration: usize, eta_tot: f64 },

    /// All points of a sweep failed.
    #[error("sweep failed: every point errored; first: {first}")]
    SweepFailed { first: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input file {path}: {reason}")]
    Parse { path: String, reason: String },
}
