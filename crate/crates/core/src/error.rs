use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated a precondition (mismatched lengths, bad parameter).
    #[error("usage error: {0}")]
    Usage(String),
    /// Input data is malformed (non-finite coordinates and similar).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An exhaustive enumeration would exceed the configured cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// Configuration file could not be parsed or failed validation.
    #[error("config error: {0}")]
    Config(String),
    /// A state that cannot arise from well-formed inputs.
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::InvalidInput(_) | Error::Config(_) | Error::Io(_) => 2,
            Error::Capacity(_) => 3,
            Error::Internal(_) => 4,
        }
    }
}
