use std::path::PathBuf;

/// Unified error type for the whole pipeline.
///
/// Every variant maps onto one of the process exit codes used by the CLI:
/// configuration problems exit 2, data problems exit 3, provider problems
/// exit 4. `Integrity` covers internal consistency violations (dimension
/// mismatches, duplicate ids) and is grouped with data errors for exit
/// purposes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("provider error: {0}")]
    Provider(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn provider(msg: impl Into<String>) -> Self {
        Error::Provider(msg.into())
    }

    pub fn integrity(msg: impl Into<String>) -> Self {
        Error::Integrity(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code the CLI reports for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Data(_) | Error::Integrity(_) | Error::Io { .. } => 3,
            Error::Provider(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// A non-fatal condition surfaced during a run.
///
/// Warnings are collected by library operations and emitted by the CLI as one
/// JSON object per line on stderr.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Warning {
    /// Stable machine-readable kind, e.g. "kamradt_fallback".
    pub kind: String,
    /// Human-readable description.
    pub message: String,
}

impl Warning {
    pub fn new(kind: impl Into<String>, message: impl Into<String>) -> Self {
        Warning {
            kind: kind.into(),
            message: message.into(),
        }
    }
}
