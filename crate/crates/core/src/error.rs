use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("value {value} at position {position} is out of range (cardinality {cardinality})")]
    OutOfRange {
        position: usize,
        value: u32,
        cardinality: u32,
    },

    #[error("genotype {0:?} is not a valid architecture")]
    InvalidSolution(Vec<u32>),

    #[error("cannot parse phenotype at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("sampling gave up after {attempts} attempts")]
    Sampling { attempts: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no stored record for genotype {0:?}")]
    UnknownSolution(Vec<u32>),

    #[error("lookup table has no key `{0}`")]
    MissingKey(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("missing data file {}", .0.display())]
    MissingData(PathBuf),

    #[error("no such test instance: {0}")]
    Index(String),

    #[error("true Pareto front is unavailable for this instance")]
    Unavailable,

    #[error("row {row}: {source}")]
    Batch {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }

    pub(crate) fn format(line: usize, message: impl ToString) -> Self {
        Error::Format {
            line,
            message: message.to_string(),
        }
    }

    /// Strips any [`Error::Batch`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Batch { source, .. } => source.root(),
            other => other,
        }
    }
}
