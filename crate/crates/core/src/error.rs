use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: entries ({row},{col}) and ({col},{row}) differ by {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("density matrix trace is {trace}, expected 1")]
    NotUnitTrace { trace: f64 },

    #[error("density matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid block partition: {0}")]
    InvalidPartition(String),

    #[error(
        "channel (eta = {eta}, kappa = {kappa}) is not completely positive: \
         requires 0 <= eta <= 1 and 2*eta^2 - 1 <= kappa <= 1"
    )]
    NotCompletelyPositive { eta: f64, kappa: f64 },

    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("derivative of the state is not traceless: trace {trace:e}")]
    NotTraceless { trace: f64 },

    #[error("Fisher information diverges: outcome {outcome} has zero probability but derivative {derivative:e}")]
    DivergentInformation { outcome: usize, derivative: f64 },

    #[error("probability vector is invalid: {0}")]
    InvalidProbabilities(String),

    #[error("quadrature did not converge: achieved {achieved:e}, required {required:e}")]
    QuadratureNotConverged { achieved: f64, required: f64 },

    #[error("degenerate estimation problem: {0}")]
    Degenerate(String),

    #[error("error propagation diverges: signal slope is {slope:e} at theta = {theta}")]
    ZeroSlope { theta: f64, slope: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter { name, value, reason }
    }
}
