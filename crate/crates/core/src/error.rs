use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum TcpError {
    #[error("shape mismatch: {what} has length {got}, expected {expected}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid tensor: {0}")]
    Tensor(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported size: dimension {dim} exceeds the limit of {limit}")]
    UnsupportedSize { dim: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, TcpError>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(TcpError::Shape {
            what,
            expected,
            got,
        })
    }
}
