use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: field `{field}`: {message}")]
    Schema {
        line: usize,
        field: String,
        message: String,
    },

    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: expected {expected} record, found {found}")]
    KindMismatch {
        line: usize,
        expected: String,
        found: String,
    },

    #[error("input contains no records")]
    EmptyInput,

    #[error("record `{qid}`: no valid candidate")]
    EmptyCandidates { qid: String },

    #[error("record `{qid}`: missing gold {which} index")]
    MissingGold { qid: String, which: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("temperature fit failed: {0}")]
    Fit(String),

    #[error("insufficient data: {0}")]
    Shortfall(String),

    #[error("missing translation for ({id}, {language})")]
    MissingTranslation { id: String, language: String },

    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero-norm vector{0}")]
    ZeroNorm(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("index {index} out of range for length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn schema(
        line: usize,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Schema {
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by unreadable or ill-formed input, as opposed
    /// to domain failures on otherwise valid data.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Schema { .. }
                | Error::Malformed { .. }
                | Error::KindMismatch { .. }
                | Error::EmptyInput
                | Error::Csv(_)
                | Error::Json(_)
                | Error::Io(_)
        )
    }
}
