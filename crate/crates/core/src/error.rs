use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing file: {0}")]
    MissingFile(PathBuf),
    #[error("empty file")]
    EmptyFile,
    #[error("header mismatch: {0}")]
    HeaderMismatch(String),
    #[error("unparseable target at row {row}: {value:?}")]
    UnparseableTarget { row: usize, value: String },
    #[error("non-finite numeric cell in column {column} at row {row}: {value:?}")]
    NonFiniteNumeric {
        column: String,
        row: usize,
        value: String,
    },
    #[error("invalid categorical cell in column {column} at row {row}: {reason}")]
    InvalidCategory {
        column: String,
        row: usize,
        reason: String,
    },
    #[error("malformed csv: {0}")]
    Csv(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("unknown column: {0}")]
    UnknownColumn(String),
    #[error("column {0} is not categorical")]
    NotCategorical(String),
    #[error("column name collision: {0}")]
    NameCollision(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("encoder was fitted on {fitted} but asked to transform {requested}")]
    AttributeMismatch { fitted: String, requested: String },
    #[error("category {0:?} was not seen at fit time")]
    UnseenCategory(String),
    #[error("labels contain a single class")]
    SingleClass,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("group {0:?} not present")]
    MissingGroup(String),
    #[error("reference group {group:?} unusable: {reason}")]
    ReferenceGroup { group: String, reason: String },
    #[error("every comparison group was skipped")]
    AllGroupsSkipped,
    #[error("unknown metric: {0}")]
    UnknownMetric(String),
    #[error("invalid population spec: {0}")]
    InvalidPopulation(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("serialization error: {0}")]
    Serialization(String),
    #[error("unsupported format version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
