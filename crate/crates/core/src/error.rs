use thiserror::Error;

/// Errors raised by the library and mapped onto CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation (e.g. `t <= 0`).
    #[error("domain error: {0}")]
    Domain(String),
    /// A violated precondition or type invariant.
    #[error("contract error: {0}")]
    Contract(String),
    /// Input data that does not parse under the declared file format.
    #[error("input format error: {0}")]
    InputFormat(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::InputFormat(msg.into())
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InputFormat(_) | Error::Json(_) | Error::Io(_) => 2,
            Error::Contract(_) | Error::Domain(_) => 3,
        }
    }
}
