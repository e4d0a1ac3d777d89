use std::io;
use std::path::PathBuf;

/// Errors surfaced by the command line, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
}

impl AppError {
    pub const EXIT_USAGE: i32 = 2;
    pub const EXIT_IO: i32 = 3;
    pub const EXIT_ESTIMATION: i32 = 4;

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => Self::EXIT_USAGE,
            AppError::Io { .. } | AppError::Input(_) => Self::EXIT_IO,
            AppError::Estimation(_) => Self::EXIT_ESTIMATION,
        }
    }

    pub fn usage(e: impl std::fmt::Display) -> Self {
        AppError::Usage(e.to_string())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }
}
