use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("structural error: {0}")]
    Structure(String),

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("degree {degree} exceeds the configured maximum {max}")]
    DegreeOverflow { degree: u32, max: u32 },

    #[error("variable index {index} out of range for {nvars} variables")]
    VariableOutOfRange { index: usize, nvars: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("missing weight for graph {0}")]
    MissingWeight(String),

    #[error("weight for graph {0} is not an exact rational")]
    InexactWeight(String),

    #[error("missing weights: {}", .0.join(", "))]
    MissingWeights(Vec<String>),

    #[error("arity mismatch: graph has {expected} ground vertices, got {got} arguments")]
    Arity { expected: usize, got: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("enumeration size cap exceeded: n={n}, m={m}")]
    SizeCap { n: usize, m: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("membership check failed: {0}")]
    Membership(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
