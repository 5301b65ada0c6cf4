use thiserror::Error;

/// Errors surfaced by solver and verification operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sigma must be a unit vector (|sigma| = {norm}, tolerance 1e-12)")]
    NonUnitSigma { norm: f64 },

    #[error("degenerate collision direction: v = v_star has no impact direction")]
    DegenerateDirection,

    #[error("states live on different grids ({left} vs {right} nodes)")]
    GridMismatch { left: usize, right: usize },

    #[error("Picard iteration did not converge in {iters} sweeps (last residual {residual:.3e})")]
    NonConvergence { iters: usize, residual: f64 },

    #[error("contraction violated: residual ratio {ratio:.3} > 1 across two sweeps")]
    ContractionViolation { ratio: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("NaN detected at t = {time}: {context}")]
    NanDetected { time: f64, context: String },

    #[error("insufficient samples: {0}")]
    Inconclusive(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
