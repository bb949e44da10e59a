use std::fmt;

/// Coarse error category, used for CLI exit codes and the FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Validation,
    Domain,
    Shape,
    InvalidArgument,
    Io,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Parse => "parse",
            ErrorKind::Validation => "validation",
            ErrorKind::Domain => "domain",
            ErrorKind::Shape => "shape",
            ErrorKind::InvalidArgument => "argument",
            ErrorKind::Io => "io",
        }
    }

    /// Process exit code for this category: 2 parse, 3 validation, 4 domain, 1 otherwise.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Parse => 2,
            ErrorKind::Validation | ErrorKind::Shape => 3,
            ErrorKind::Domain => 4,
            ErrorKind::InvalidArgument | ErrorKind::Io => 1,
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: u64,
        message: String,
    },

    #[error("invalid input: {0}")]
    Format(String),

    #[error("distance matrix failed validation: {0}")]
    Validation(String),

    #[error("rows {rows:?} have norm >= 1; the Poincare metric needs points strictly inside the unit ball")]
    OutsideBall { rows: Vec<usize> },

    #[error("non-finite value in row {row}")]
    NonFinite { row: usize },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("indices must be distinct: {0:?}")]
    RepeatedIndex(Vec<usize>),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Shape(_) => ErrorKind::Shape,
            Error::Parse { .. } | Error::Format(_) => ErrorKind::Parse,
            Error::Validation(_) => ErrorKind::Validation,
            Error::OutsideBall { .. } | Error::Degenerate(_) | Error::Undefined(_) => {
                ErrorKind::Domain
            }
            Error::NonFinite { .. } => ErrorKind::Validation,
            Error::TooFewPoints { .. }
            | Error::IndexOutOfRange { .. }
            | Error::RepeatedIndex(_)
            | Error::InvalidArgument(_) => ErrorKind::InvalidArgument,
            Error::Io { .. } => ErrorKind::Io,
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
