use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter, interval or configuration value is out of its domain.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Requested set sizes do not fit the transmitter pool.
    #[error("infeasible set sizes: {0}")]
    Infeasible(String),

    /// Input data (frames, transmitters, result files) is absent or unreadable.
    #[error("missing data: {0}")]
    MissingData(String),

    /// Shapes or lengths of two inputs disagree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A numeric precondition failed (empty input, zero frame, single class ...).
    #[error("invalid input: {0}")]
    Input(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 2,
            Error::Infeasible(_) => 3,
            Error::MissingData(_) | Error::Io { .. } | Error::Csv(_) => 4,
            Error::Shape(_) | Error::Input(_) => 1,
        }
    }
}
