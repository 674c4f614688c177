use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("quote is not admissible at spread state {spread}: improving quotes need a spread of at least two ticks")]
    InadmissibleQuote { spread: usize },

    #[error("spread state {state} outside 1..={m}")]
    SpreadOutOfRange { state: usize, m: usize },

    #[error("invalid market model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("empty input")]
    EmptyInput,

    #[error("timestamps not sorted at record {row}")]
    UnsortedTimestamps { row: usize },

    #[error("invalid tick record {row}: {reason}")]
    InvalidTick { row: usize, reason: String },

    #[error("tick clock bucket {bucket} has zero length")]
    ZeroLengthBucket { bucket: usize },

    #[error("no spread transitions observed")]
    NoTransitions,

    #[error("all occupation times are zero")]
    NoOccupation,

    #[error("ratio undefined: standard deviation is zero")]
    UndefinedRatio,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
