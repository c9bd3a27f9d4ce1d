use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("derivative order {requested} exceeds smoothness order {available} of `{function}`")]
    OrderTooLarge {
        function: String,
        requested: usize,
        available: usize,
    },

    #[error("unknown test function `{0}`")]
    UnknownFunction(String),

    #[error("empty plan")]
    EmptyPlan,

    #[error("empty radial interval [{lo}, {hi}]")]
    EmptyRadialInterval { lo: f64, hi: f64 },

    #[error("non-finite kernel value {value} at x={x:?}, sigma={sigma:?}, t={t}")]
    NonFiniteKernel {
        value: f64,
        x: Vec<f64>,
        sigma: Vec<f64>,
        t: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("mollifier certification failed: {0}")]
    Certification(String),

    #[error("non-finite functional value at parameter {0}")]
    NonFiniteSweep(f64),

    #[error("uniform bound violated at delta={delta}: value {value} > {bound}")]
    BoundViolation { delta: f64, value: f64, bound: f64 },
}
