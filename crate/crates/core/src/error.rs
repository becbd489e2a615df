use thiserror::Error;

/// Errors raised by constructions, validators and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("label error: {0}")]
    Label(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("validity error: {0}")]
    Validity(String),

    #[error("access error: {0}")]
    Access(String),

    #[error("dimension {dim} exceeds the cap {cap}")]
    Capacity { dim: usize, cap: usize },

    #[error("solver error: {message} (iterations {iterations}, primal infeasibility {primal_infeasibility:e}, dual infeasibility {dual_infeasibility:e}, gap {gap:e})")]
    Solver {
        message: String,
        iterations: usize,
        primal_infeasibility: f64,
        dual_infeasibility: f64,
        gap: f64,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
