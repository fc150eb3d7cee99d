use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no density: {0}")]
    NoDensity(String),

    #[error("moment E|X|^{alpha} is infinite for {dist}")]
    InfiniteMoment { alpha: f64, dist: String },

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error(
        "rejection sampler gave up after {iterations} proposals \
         ({accepted} accepted, acceptance rate {acceptance_rate:.3e})"
    )]
    RejectionCapExceeded {
        iterations: u64,
        accepted: usize,
        acceptance_rate: f64,
    },

    #[error("quadrature did not converge: value {value}, error estimate {error:.3e}")]
    Quadrature { value: f64, error: f64 },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("chunk {chunk}: {source}")]
    Chunk {
        chunk: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed distribution description: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
