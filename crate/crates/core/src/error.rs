//! Error type shared by every solver module.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failures reported by grid construction, operators and time steppers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error(
        "momentum cell {cell} has |p| = {norm:e}, too close to the origin for the radiation kernel"
    )]
    SingularMomentum { cell: usize, norm: f64 },

    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("courant number {0} outside (0, 0.9]")]
    InvalidCfl(f64),

    #[error("{quantity} is not positive at cell {cell} (value {value:e})")]
    NonPositive {
        quantity: &'static str,
        cell: usize,
        value: f64,
    },

    #[error("non-finite {quantity} at cell {cell}")]
    NonFinite { quantity: &'static str, cell: usize },

    #[error("|grad phi| = {norm:e} below the floor {floor:e} at cell {cell}")]
    DegenerateGradient { cell: usize, norm: f64, floor: f64 },

    #[error("momentum field is not curl free (max |curl| = {max_curl:e})")]
    NotCurlFree { max_curl: f64 },

    #[error("momentum field has nonzero mean {mean:e} on a periodic line")]
    NonZeroMean { mean: f64 },

    #[error("tensor degree {degree} exceeds the supported maximum {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("weight is not flagged as commuting with the Hamiltonian")]
    NonCommutingWeight,

    #[error("wrong Hamiltonian: {0}")]
    WrongHamiltonian(String),

    #[error("{0} requires Hamiltonian derivatives of order three or higher")]
    MissingDerivatives(String),

    #[error("density {value:e} below the vacuum floor {floor:e} at cell {cell}")]
    Vacuum { cell: usize, value: f64, floor: f64 },

    #[error("negative {coefficient} coefficient {value:e} at cell {cell}")]
    NegativeCoefficient {
        coefficient: &'static str,
        cell: usize,
        value: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "linear solver did not converge after {iterations} iterations (residual {residual:e})"
    )]
    SolverDiverged { iterations: usize, residual: f64 },
}
