use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("value {value} at row {row}, column {col} is outside {{-1}} U [0, 1]")]
    OutOfRange { row: usize, col: usize, value: f64 },

    #[error("invalid dissimilarity matrix: {0}")]
    InvalidDissimilarity(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{name} = {value} is out of range ({expected})")]
    Parameter {
        name: &'static str,
        value: String,
        expected: String,
    },

    #[error("matrix of size {n} exceeds the oracle bound of {bound}")]
    OracleBound { n: usize, bound: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid geohash character {0:?}")]
    GeohashChar(char),

    #[error("coordinates out of range: lat {lat}, lon {lon}")]
    Coordinates { lat: f64, lon: f64 },

    #[error("missing aggregate for {grouping} key {key}")]
    MissingAggregate { grouping: String, key: String },

    #[error("non-finite loss at iteration {0}")]
    NonFiniteLoss(usize),

    #[error("inconsistent configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, value: impl ToString, expected: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            value: value.to_string(),
            expected: expected.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
