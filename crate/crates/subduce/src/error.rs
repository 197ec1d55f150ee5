use thiserror::Error;

/// Errors produced by the subduction library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid tableau: {0}")]
    InvalidTableau(String),

    #[error("partition sizes are incompatible: |lambda| = {n}, |lambda1| = {n1}, |lambda2| = {n2}")]
    IncompatiblePartitions { n: usize, n1: usize, n2: usize },

    #[error("generator index {i} out of range (valid: {min}..={max})")]
    IndexOutOfRange { i: usize, min: usize, max: usize },

    #[error("generator g_{i} does not act on the split structure")]
    UndefinedAction { i: usize },

    #[error("axial distance must be nonzero")]
    ZeroAxialDistance,

    #[error("ambient dimension mismatch: {left} vs {right}")]
    AmbientMismatch { left: usize, right: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("problem size {size} exceeds the dense-path guard {guard}")]
    SizeGuardExceeded { size: usize, guard: usize },

    #[error("incomplete block set: assembled {assembled} of {expected} split columns")]
    IncompleteBlockSet { assembled: usize, expected: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
