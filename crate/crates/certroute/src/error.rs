use certroute_core::generate::GenError;
use certroute_core::{BuildError, GraphError};

/// A malformed line in one of the text formats.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("generator: {0}")]
    Gen(#[from] GenError),
    #[error("build: {0}")]
    Build(#[from] BuildError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("record: {0}")]
    Record(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}
