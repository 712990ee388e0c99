use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, ArenaError>;

#[derive(Debug, Error)]
pub enum ArenaError {
    /// A CSV row that could not be turned into a record. `row` is 1-based and
    /// counts the header as row 1.
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("unexpected header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("duplicate month {month} for item {item} org {org}")]
    DuplicateMonth { item: u64, org: u64, month: String },

    #[error("item {item} org {org} has sales but no price records")]
    MissingPrices { item: u64, org: u64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("nothing to backtest")]
    NothingToBacktest,
}

impl ArenaError {
    pub(crate) fn row(row: usize, message: impl Into<String>) -> Self {
        ArenaError::Row {
            row,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ArenaError::Io {
            path: path.into(),
            source,
        }
    }
}
