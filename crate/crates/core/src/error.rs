use thiserror::Error;

/// Errors raised by the simulation and protocol layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid population size {n}: at least {min} agent(s) required")]
    InvalidPopulation { n: usize, min: usize },
    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
