//! Crate-wide error type.

/// Errors produced by the numerical routines and scenario validation.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument is outside the range the implementation supports.
    #[error("unsupported range: {0}")]
    UnsupportedRange(String),

    /// A coefficient that must be nonzero degenerated to zero.
    #[error("singular coefficient: {0}")]
    SingularCoefficient(String),

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    /// A scenario or its components violate a structural invariant.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
