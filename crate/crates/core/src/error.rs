use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The transmission problem of degree `k` has no (numerically) unique solution.
    #[error("mode of degree {k} is singular ({detail})")]
    ModeSingular {
        k: usize,
        condition: Option<f64>,
        detail: String,
    },

    #[error("singular integrand: {0}")]
    SingularIntegrand(String),

    #[error("radial oracle failed: {0}")]
    OracleFailure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;
