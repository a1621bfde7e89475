use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input or configuration; maps to exit code 1.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A solver or tolerance check failed; maps to exit code 2.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// An invariant suite reported failures; maps to exit code 3.
    #[error("invariant failure: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 1,
            Error::Numerical(_) => 2,
            Error::Invariant(_) => 3,
        }
    }
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

pub(crate) fn numerical<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Numerical(msg.into()))
}
