//! CLI error type carrying the process exit code.

use std::fmt;

/// Exit codes: 2 validation, 3 runtime/data, 4 I/O.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments.
    Validation(String),
    /// Well-formed request, bad data (unparseable corpus line, degenerate
    /// training labels, ...).
    Data(String),
    /// The filesystem said no.
    Io(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn validation(msg: impl Into<String>) -> CliError {
        CliError::Validation(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> CliError {
        CliError::Data(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> CliError {
        CliError::Io(msg.into())
    }

    /// A core-library error surfaced while checking user-supplied settings.
    pub fn from_validation(err: cdr_core::Error) -> CliError {
        CliError::Validation(err.to_string())
    }

    /// A core-library error surfaced while processing user-supplied data.
    pub fn from_data(err: cdr_core::Error) -> CliError {
        CliError::Data(err.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Data(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Data(msg) => write!(f, "data error: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Write `contents` to `dir/name`, creating `dir` as needed.
pub fn write_artifact(dir: &std::path::Path, name: &str, contents: &str) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("creating {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))
}
