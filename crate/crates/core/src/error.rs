//! Error type shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MengerError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "enumeration budget exceeded: {required:.3e} tuple evaluations exceed the {limit:.3e} cap; \
         use the Monte Carlo estimator instead"
    )]
    BudgetExceeded { required: f64, limit: f64 },

    #[error("degenerate affine hull")]
    DegenerateAffineHull,

    #[error("zero-mass region")]
    ZeroMassRegion,

    #[error(
        "permutation averaging refused: arity {arity} would cost {cost} inner evaluations per tuple \
         (cap is arity <= {cap})"
    )]
    SymmetrizeCost { arity: usize, cost: u64, cap: usize },

    #[error("unsupported (m, n) = ({m}, {n}) for brute-force plane search{detail}")]
    UnsupportedBruteForce { m: usize, n: usize, detail: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MengerError>;
