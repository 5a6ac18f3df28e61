use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Block sizes, process parameters or simulation settings that cannot
    /// produce a valid computation.
    #[error("configuration error: {0}")]
    Config(String),

    /// Mismatched lengths or dimensions.
    #[error("shape error: {0}")]
    Shape(String),

    /// The normalizing denominator of a statistic vanished.
    #[error("degenerate denominator in {0}")]
    DegenerateDenominator(&'static str),

    /// Too many replications of a Monte Carlo run hit a degenerate denominator.
    #[error("{degenerate} of {reps} replications were degenerate (limit {limit})")]
    TooManyDegenerate {
        degenerate: u64,
        reps: u64,
        limit: u64,
    },

    /// Malformed input data. `row` and `column` are 1-based.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
