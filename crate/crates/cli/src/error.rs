use std::path::PathBuf;

use hbt_core::HbtError;
use thiserror::Error;

pub const EXIT_PHYSICS: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or command-line input.
    #[error("{0}")]
    Usage(String),

    /// A failure inside the simulation itself: rejection envelope, fit.
    #[error(transparent)]
    Physics(#[from] HbtError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A report or table that cannot be read back.
    #[error("{}: {reason}", path.display())]
    Malformed { path: PathBuf, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Physics(_) => EXIT_PHYSICS,
            CliError::Usage(_) | CliError::Io { .. } | CliError::Malformed { .. } => EXIT_USAGE,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        CliError::Malformed {
            path: path.into(),
            reason: reason.to_string(),
        }
    }
}

/// Turns a parameter rejected by the core into a usage error naming the
/// configuration key.
pub(crate) fn usage_from(err: HbtError) -> CliError {
    match err {
        HbtError::InvalidParameter { name, reason } => {
            CliError::Usage(format!("invalid `{name}`: {reason}"))
        }
        HbtError::InvalidArgument(reason) => CliError::Usage(reason),
        other => CliError::Physics(other),
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
