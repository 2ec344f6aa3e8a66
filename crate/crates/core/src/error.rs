//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arity {n} exceeds the dense-table cap of {max}")]
    Capacity { n: usize, max: usize },

    #[error("search space of {assignments} assignments exceeds the brute-force cap of {cap}")]
    SearchSpace { assignments: u128, cap: u128 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("function table is not folded")]
    NotFolded,

    #[error("constraint kind mismatch: expected {expected}, found {found}")]
    Kind { expected: String, found: String },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
