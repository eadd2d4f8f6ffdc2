use thiserror::Error;

use crate::khk::CartanSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not skew-Hermitian (||A + A^dag||_F = {defect:.3e})")]
    NotSkewHermitian { defect: f64 },

    #[error("matrix is not unitary (||U^dag U - I||_F = {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("matrix is not special unitary (|det - 1| = {defect:.3e})")]
    NotSpecial { defect: f64 },

    #[error("basis elements {i} and {j} are not trace-orthogonal (overlap {overlap:.3e})")]
    NonOrthogonalBasis { i: usize, j: usize, overlap: f64 },

    #[error("matrix is numerically singular (smallest singular value {sigma_min:.3e})")]
    Singular { sigma_min: f64 },

    #[error("invalid Pauli label {label:?}: {reason}")]
    BadLabel { label: String, reason: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("{context}: subspace residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    SubspaceViolation { context: &'static str, residual: f64, tol: f64 },

    #[error("Cartan optimizer did not reach tolerance after all restarts (relative commutator {}, best effort kept)", .best.relative_commutator)]
    OptimizerFailed { best: Box<CartanSolution> },

    #[error("matrix does not have the A (x) I2 block pattern (defect {defect:.3e})")]
    NotTensorWithIdentity { defect: f64 },

    #[error("factor at level {level} does not fit a {n_total}-qubit register")]
    LevelExceedsRegister { level: usize, n_total: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("BCH truncation order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    #[error("BCH root search stopped after {iters} iterations with residual {residual:.3e}")]
    RootSearchFailed { iters: usize, residual: f64 },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { location: location.into(), message: message.into() }
    }
}
