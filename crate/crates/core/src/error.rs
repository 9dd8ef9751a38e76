use thiserror::Error;

use crate::moments::MomentResult;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum YuleError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical kernel failed (non-convergence, overflow, singular system).
    #[error("numeric failure at n = {n}: {reason}")]
    Numeric { n: usize, reason: String },

    /// Adaptive quadrature exhausted its budget before meeting the tolerance.
    #[error(
        "quadrature did not converge: error estimate {:.3e} for value {:.12} after {} cells",
        partial.abs_error_estimate, partial.value, partial.cells_used
    )]
    Convergence { partial: Box<MomentResult> },

    /// An improper integral does not converge (for example a negative moment
    /// that is infinite).
    #[error("integral diverges: {0}")]
    Divergence(String),

    /// Two routes that must agree did not.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, YuleError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(YuleError::Domain(msg.into()))
}
