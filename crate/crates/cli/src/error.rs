use std::path::{Path, PathBuf};

use thiserror::Error;

/// Everything a command can fail with. Each variant maps to a process exit
/// code and a short stable cause code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {msg}", path.display())]
    Io { path: PathBuf, msg: String },
    /// The file was read but its content is malformed.
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },
    #[error(transparent)]
    Core(#[from] sagvic::Error),
}

impl CliError {
    pub fn io(path: &Path, err: impl std::fmt::Display) -> CliError {
        CliError::Io {
            path: path.to_path_buf(),
            msg: err.to_string(),
        }
    }

    pub fn format(path: &Path, err: impl std::fmt::Display) -> CliError {
        CliError::Format {
            path: path.to_path_buf(),
            msg: err.to_string(),
        }
    }

    /// 1 usage, 2 I/O or malformed input, 3 numerical degeneracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } | CliError::Format { .. } => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(sagvic::Error::InvalidInput(_)) => 1,
            CliError::Core(_) => 2,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Format { .. } => "format",
            CliError::Core(e) => e.code(),
        }
    }

    /// `error: <code>: <message>` on one line.
    pub fn render(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error: {}: {}", self.code(), msg.trim())
    }
}

pub type CliResult<T> = Result<T, CliError>;
