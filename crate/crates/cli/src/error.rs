use std::path::{Path, PathBuf};

use spatial_entropy::Error;
use thiserror::Error as ThisError;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status: 2 for bad flags or incompatible inputs, 3 for
    /// file problems, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Format(_) => EXIT_IO,
            CliError::Core(e) => match e {
                Error::NonFiniteData { .. } | Error::DegeneratePmf | Error::InvalidShape { .. } => EXIT_NUMERIC,
                _ => EXIT_USAGE,
            },
        }
    }
}
