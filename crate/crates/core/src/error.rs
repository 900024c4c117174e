use alloc::string::String;

/// Errors reported by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: dimension {dim}, level {level} (need dim in {{1,2}} and 2 <= level <= 14)")]
    InvalidGrid { dim: usize, level: u32 },

    #[error("grid mismatch: operands live on different grids")]
    GridMismatch,

    #[error("cube does not belong to this grid: {0}")]
    CubeMismatch(String),

    #[error("cube has empty intersection with the domain")]
    EmptyCube,

    #[error("values must be finite and nonnegative (cell {cell})")]
    InvalidValue { cell: usize },

    #[error("weight must be strictly positive and finite (cell {cell})")]
    NotPositive { cell: usize },

    #[error("length {got} does not match cell count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("input function vanishes identically")]
    ZeroFunction,

    #[error("exponent {exponent} is not integrable in dimension {dim}")]
    NonIntegrable { exponent: f64, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid exponent system: violated {0}")]
    InvalidExponents(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
