use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Taylor series did not converge after {terms} terms (last term norm {last_norm:e})")]
    Convergence { terms: usize, last_norm: f64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("conditioning event has probability {probability:e}, conditional is undefined")]
    UndefinedConditional { probability: f64 },

    #[error("linear program is numerically ambiguous at tolerance {tol:e} ({detail}); retry with exact rational arithmetic")]
    Precision { tol: f64, detail: String },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
