use std::path::PathBuf;

/// Errors produced by the engine.
///
/// The variants map onto the failure classes the CLI translates into exit
/// codes: missing files, invalid configuration, invalid per-call inputs,
/// stateful preconditions, and backends that are not available in this build.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("missing prediction for frame {0}")]
    MissingPrediction(u64),

    #[error("model runtime unavailable: {0}")]
    RuntimeUnavailable(String),

    #[error("{path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// A missing-file error for a required input path.
    pub fn missing_input(path: impl Into<PathBuf>, what: &str) -> Self {
        Error::Io {
            path: path.into(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, what.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
