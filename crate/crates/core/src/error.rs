use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bandwidth: {0}")]
    InvalidBandwidth(String),

    /// A local weighted system could not be solved. `stage` is set when the
    /// failure happened inside a boosting run.
    #[error(
        "singular local system at observation {location}{} (condition estimate {condition:.3e})",
        stage.map(|s| format!(", stage {s}")).unwrap_or_default()
    )]
    SingularSystem {
        location: usize,
        condition: f64,
        stage: Option<usize>,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("bandwidth search failed: {0}")]
    SearchFailed(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("replication {rep} failed: {source}")]
    Replication {
        rep: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag, used by the CLI for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidBandwidth(_) => "invalid-bandwidth",
            Error::SingularSystem { .. } => "singular-system",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::ZeroVariance(_) => "zero-variance",
            Error::InvalidInput(_) => "invalid-input",
            Error::InvalidConfig(_) => "invalid-config",
            Error::SearchFailed(_) => "search-failed",
            Error::Schema(_) => "schema",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::Replication { .. } => "replication",
        }
    }
}
