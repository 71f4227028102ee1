use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid pauli string {0:?}")]
    PauliSyntax(String),

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("stabilizer group too large: {generators} generators exceeds cap of {cap}")]
    GroupTooLarge { generators: usize, cap: usize },

    #[error("dense oracle supports at most {cap} qubits, code has {n}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("singular point: success probability {p_s:e} vanishes at {point:?}")]
    Singular { point: Vec<f64>, p_s: f64 },

    #[error("point {point:?} is not a fixed point (residual {residual:e})")]
    NotFixedPoint { point: Vec<f64>, residual: f64 },

    #[error("output index {index} out of range for k = {k}")]
    OutputIndex { index: usize, k: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("plane mismatch: {0}")]
    PlaneMismatch(String),

    #[error("invalid cost model: {0}")]
    InvalidModel(String),

    #[error("unknown catalog entry {0:?}")]
    UnknownCode(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
