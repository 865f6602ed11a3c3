use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} = {value} outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("shape mismatch: expected {expected} samples, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("unstable model: {0}")]
    Model(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("spectral density vanishes at f = {0}")]
    DegenerateSpectrum(f64),

    #[error("frequency {0} is at zero or Nyquist; the approximation is not defined there")]
    EdgeFrequency(f64),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
