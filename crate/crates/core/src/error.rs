use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("insufficient data: need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge (best estimate {estimate}, error estimate {error_estimate:e})")]
    NonConvergence { estimate: f64, error_estimate: f64 },

    #[error("optimizer did not converge: {0}")]
    Optimization(String),

    #[error("replicate {replicate} failed after {attempts} resamples: {source}")]
    Resample {
        replicate: usize,
        attempts: usize,
        source: Box<Error>,
    },

    #[error("BCa interval undefined: {0}")]
    BcaUndefined(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonConvergence { .. } | Error::Optimization(_) | Error::BcaUndefined(_) => true,
            Error::Resample { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
