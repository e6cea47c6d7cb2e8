use thiserror::Error;

/// Errors produced by the analysis, simulation and sweep layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("Gauss-Laguerre root refinement did not converge (order {order}, node {index})")]
    QuadratureConvergence { order: usize, index: usize },

    #[error("invalid configuration field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("adaptive integration did not converge: estimated error {achieved:e}, requested {requested:e}")]
    Integration { achieved: f64, requested: f64 },

    #[error("secrecy outage probability underflows on the requested grid: {0}")]
    Underflow(String),

    #[error("invalid sweep specification: {0}")]
    InvalidSweep(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
