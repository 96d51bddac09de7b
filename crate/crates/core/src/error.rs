use thiserror::Error;

/// Errors raised by the environment, learners and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed layout document at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty pool")]
    EmptyPool,

    #[error("layout {layout_id}: {constraint}")]
    InvalidLayout {
        layout_id: String,
        constraint: String,
    },

    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),

    #[error("unknown action id {0}")]
    UnknownAction(usize),

    #[error("cannot step a finished episode")]
    EpisodeDone,

    #[error("index out of range: {what} {index} >= {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;
