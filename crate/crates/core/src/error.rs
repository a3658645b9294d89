use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("value {value} at row {row}, column {column} is outside 1..={max}")]
    OutOfRange {
        row: usize,
        column: usize,
        value: i64,
        max: u32,
    },

    #[error("row {row} has {found} columns, expected {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("encoded text has {len} symbols, need at least {needed}")]
    TextTooShort { len: usize, needed: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("slice sampler did not accept a point within {0} shrinkage steps")]
    SliceExhausted(usize),

    #[error("chain contains no samples")]
    EmptyChain,

    #[error("chain output failed at iteration {iteration}: {source}")]
    ChainIo {
        iteration: usize,
        #[source]
        source: io::Error,
    },

    #[error("chain file: {0}")]
    ChainFormat(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
