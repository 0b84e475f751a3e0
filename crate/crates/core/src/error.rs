use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("trace is not in the language of the model")]
    NotInLanguage,
    #[error("degenerate risk: every state has risk 0")]
    DegenerateRisk,
    #[error("no policy induces a valid trace")]
    Infeasible,
    #[error("enumeration budget exceeded ({0} paths)")]
    BudgetExceeded(u64),
    #[error("malformed policy: {0}")]
    MalformedPolicy(String),
    #[error("learning aborted: {0}")]
    Aborted(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse { line: e.line(), column: e.column(), msg: e.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
