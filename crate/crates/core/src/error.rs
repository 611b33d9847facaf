use thiserror::Error;

use crate::analytic::FixedPointState;

#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not reach tolerance {requested:e} (achieved {achieved:e})")]
    Quadrature { requested: f64, achieved: f64 },

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last: Box<FixedPointState>,
    },

    #[error("unstable operating point: {reason}")]
    Unstable {
        reason: String,
        last: Option<Box<FixedPointState>>,
    },

    #[error("numeric error: {0}")]
    Numeric(String),
}

impl ModelError {
    /// Short machine-readable code, used on the CLI error stream.
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::Domain(_) => "domain",
            ModelError::Quadrature { .. } => "quadrature",
            ModelError::NoConvergence { .. } => "no-convergence",
            ModelError::Unstable { .. } => "unstable",
            ModelError::Numeric(_) => "numeric",
        }
    }
}

pub type Result<T> = std::result::Result<T, ModelError>;
