//! Process-level error type and exit-code mapping.

use std::fmt;
use std::io;

/// Exit codes: 0 success, 1 I/O, 2 bad configuration or arguments,
/// 3 budget exceeded, 4 precision failure.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(lehmerlab_core::Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                lehmerlab_core::Error::Capacity(_) => 3,
                lehmerlab_core::Error::Precision(_) => 4,
                _ => 2,
            },
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<lehmerlab_core::Error> for CliError {
    fn from(e: lehmerlab_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub type CliResult<T> = Result<T, CliError>;
