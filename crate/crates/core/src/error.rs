//! Error taxonomy shared by the library and the command-line front end.
//!
//! Every failure is tagged with a [`Category`] so that the binary can map it
//! onto a stable process exit code: configuration problems exit with 2,
//! violated runtime preconditions with 3, and I/O failures with 4.

use thiserror::Error;

/// Coarse failure class, used to derive process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Malformed or inconsistent configuration input.
    Config,
    /// A documented precondition of an operation was violated at runtime.
    Precondition,
    /// Filesystem or serialization failure.
    Io,
}

impl Category {
    /// Process exit code for this failure class.
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Config => 2,
            Category::Precondition => 3,
            Category::Io => 4,
        }
    }
}

/// Unified error type for all fallible operations in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Configuration file cannot be parsed or fails validation.
    #[error("config error: {0}")]
    Config(String),

    /// An operation was invoked outside its documented domain.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Underlying filesystem or serialization failure.
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        Error::Io(msg.into())
    }

    /// Failure class of this error.
    pub fn category(&self) -> Category {
        match self {
            Error::Config(_) => Category::Config,
            Error::Precondition(_) => Category::Precondition,
            Error::Io(_) => Category::Io,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
