use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("arc length {s} outside path range [0, {length}]")]
    OutOfRange { s: f64, length: f64 },

    #[error("profile ends at s = {end} which overruns the path length {length}")]
    Overrun { end: f64, length: f64 },

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("refusing intractable enumeration of {count} candidates (limit {limit})")]
    Intractable { count: u128, limit: u128 },

    #[error("unknown built-in scenario `{0}`")]
    UnknownScenario(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
