use thiserror::Error;

/// Errors produced by the factorizations, generators and file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("index {index} out of range for length {bound}")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("leading triangular block is singular")]
    SingularBlock,

    #[error("strong RRQR did not converge within {iterations} swaps")]
    TerminationFailure { iterations: usize },

    #[error("sketch pivots map to an empty column support")]
    EmptySupport,

    #[error("panel starting at column {column} is exactly singular")]
    SingularPanel { column: usize },

    #[error("{count} subsets exceed the exhaustive search cap of {cap}")]
    CombinatorialBlowup { count: u128, cap: u128 },

    #[error("malformed matrix file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
