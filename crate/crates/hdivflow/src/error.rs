use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: {source}", .path.display())]
    File { path: PathBuf, source: Box<Error> },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] hdivflow_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Attach the file a nested error came from, unless it already names one.
    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            e @ (Error::Io { .. } | Error::File { .. }) => e,
            other => Error::File {
                path: path.into(),
                source: Box::new(other),
            },
        }
    }
}
