use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no interior equilibrium: h - e - i = {margin} is not positive")]
    NoInteriorEquilibrium { margin: f64 },

    #[error("integration blew up at step {step}: component {value} below -1e-6")]
    Integration { step: usize, value: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
