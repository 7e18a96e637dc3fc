use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] dsgpa_core::Error),

    #[error("no trace files found in {}", .0.display())]
    NoTraces(PathBuf),
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        SimError::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// 1 for bad input or configuration, 2 for failed reads and writes.
    pub fn exit_code(&self) -> u8 {
        match self {
            SimError::Io { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
