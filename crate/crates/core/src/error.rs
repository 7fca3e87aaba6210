use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("variable index {index} outside layout of {len} variables (block `{block}`)")]
    IndexOutOfLayout { block: String, index: usize, len: usize },
    #[error("non-finite residual in block `{block}`")]
    NonFinite { block: String },
    #[error("linear solve failed after {attempts} damping increases (last damping {damping:e})")]
    Factorization { attempts: usize, damping: f64 },
}

pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}
