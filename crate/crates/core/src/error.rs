use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A law or grid could not be constructed with the requested parameters.
    #[error("infeasible parameters: {0}")]
    Construction(String),

    /// An operation was called on an object in the wrong state or with bad arguments.
    #[error("usage error: {0}")]
    Usage(String),

    /// A configured step, state or sample budget was exhausted.
    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
