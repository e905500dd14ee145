use chrono::NaiveDate;
use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series is empty")]
    EmptySeries,

    #[error("invalid load {load} on {date}: loads must be finite and nonnegative")]
    InvalidLoad { date: NaiveDate, load: f64 },

    #[error("dates must be strictly increasing ({prev} is followed by {next})")]
    UnorderedDates { prev: NaiveDate, next: NaiveDate },

    #[error("not yet defined at {at}: need {needed} days of history, have {available}")]
    InsufficientHistory {
        at: NaiveDate,
        needed: usize,
        available: usize,
    },

    #[error("date {0} is outside the series")]
    DateOutOfRange(NaiveDate),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("plan does not continue history: expected first planned day {expected}, got {got}")]
    DiscontinuousPlan { expected: NaiveDate, got: NaiveDate },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("duplicate record for athlete `{athlete}` on {date} (planned={planned}) at line {line}")]
    DuplicateRecord {
        athlete: String,
        date: NaiveDate,
        planned: bool,
        line: usize,
    },

    #[error("unknown level `{value}` for `{field}`")]
    UnknownLevel { field: String, value: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
