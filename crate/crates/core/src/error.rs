use std::fmt;

/// Errors shared by every module in this crate.
///
/// The variants are deliberately coarse: callers (in particular the CLI) only
/// distinguish bad inputs, blown resource limits, and lost floating precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A precondition on the arguments was violated.
    Domain(String),
    /// `n` has no inverse modulo `q`.
    NotInvertible { n: u64, q: u64 },
    /// A table size or enumeration budget was exceeded.
    Capacity(String),
    /// A floating-point residual was too large to trust the rounded result.
    Precision(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NotInvertible { n, q } => write!(f, "{n} is not invertible mod {q}"),
            Error::Capacity(msg) => write!(f, "capacity exceeded: {msg}"),
            Error::Precision(msg) => write!(f, "precision loss: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn capacity(msg: impl Into<String>) -> Error {
    Error::Capacity(msg.into())
}

pub(crate) fn precision(msg: impl Into<String>) -> Error {
    Error::Precision(msg.into())
}
