use thiserror::Error;

/// Errors produced by the estimators and the numerical helpers they rely on.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(
        "covariance matrix is singular or not positive definite (min eigenvalue {min}, max {max})"
    )]
    SingularCovariance { min: f64, max: f64 },

    #[error("eigen-decomposition did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("infeasible sizes: {0}")]
    Infeasible(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cell (k = {k}, alpha = {alpha}) is invalid: {reason}")]
    InvalidCell {
        k: usize,
        alpha: f64,
        reason: String,
    },

    #[error("rejection sampling exhausted after {attempts} attempts")]
    RejectionExhausted { attempts: usize },

    #[error("insufficient Monte Carlo draws: {got} < {min}")]
    InsufficientDraws { got: usize, min: usize },

    #[error("bisection failed to bracket the target after {iterations} iterations")]
    NonBracketing { iterations: usize },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
