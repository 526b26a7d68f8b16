use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    /// A factorization failed to converge. `iterations` is the iteration
    /// count reached when the backend reports it.
    #[error("numeric failure in {operation} ({rows}x{cols}, iterations: {iterations:?})")]
    NumericFailure {
        operation: &'static str,
        rows: usize,
        cols: usize,
        iterations: Option<usize>,
    },

    #[error("degenerate node: {0}")]
    DegenerateNode(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: usize,
        message: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 2 config, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::InvalidRequest(_) | Error::Json(_) => 2,
            Error::InvalidInput(_)
            | Error::Parse { .. }
            | Error::Format(_)
            | Error::Io(_)
            | Error::Csv(_) => 3,
            Error::NumericFailure { .. } | Error::DegenerateNode(_) => 4,
        }
    }
}
