use thiserror::Error;

use crate::signals::Unit;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Parameters that cannot describe a valid computation (window not a
    /// multiple of dt, non-increasing stage windows, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data that is empty, too short, non-finite or badly sampled.
    #[error("input error: {0}")]
    Input(String),

    #[error("unit error: expected {expected}, found {found}")]
    Unit { expected: Unit, found: Unit },

    /// A mathematically undefined request (e.g. a crossover that does not exist).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("csv error: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
