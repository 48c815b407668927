use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    MapParse { path: PathBuf, line: usize, reason: String },
    #[error("map value {value} does not survive the 6-decimal file format")]
    MapPrecision { value: f64 },
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] smanbo_core::Error),
    #[error("cell lambda={lambda} radius={radius}: {source}")]
    Cell {
        lambda: f64,
        radius: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for problems with the user's configuration rather than the run.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Core(smanbo_core::Error::Invalid { .. }))
    }
}

/// Configuration problem, located by key and line where possible.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{message}")]
    Syntax { message: String, line: Option<usize> },
    #[error("{key}{}: {reason}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Invalid { key: String, line: Option<usize>, reason: String },
}
