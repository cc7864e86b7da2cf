use thiserror::Error;

/// Errors produced by the solver and its supporting routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("index {index} out of range 1..={order}")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error("degenerate quadratic form: {0}")]
    DegenerateForm(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("problem is not right definite: {0}")]
    NotRightDefinite(String),

    #[error("operator of order {order} exceeds the cap of {cap}")]
    TooLarge { order: usize, cap: usize },

    #[error("invalid metric: sample {value} at node {node} of {component}")]
    InvalidMetric {
        component: &'static str,
        node: usize,
        value: f64,
    },

    #[error("not enough data: {0}")]
    NotEnoughData(String),

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("invalid problem file: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
