use thiserror::Error;

/// Errors raised by the numerical routines, samplers and experiment runners.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("{what} did not converge (best estimate {best})")]
    NonConvergence { what: &'static str, best: f64 },

    #[error("quadrature did not reach tolerance after {subdivisions} subdivisions (value {value}, error estimate {error})")]
    Quadrature { value: f64, error: f64, subdivisions: usize },

    #[error("truncation: {0}")]
    Truncation(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("plan rejected: {0}")]
    Rejected(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for errors caused by the caller's input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain { .. } | Error::Invalid(_) | Error::Rejected(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
