use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Adaptive step size dropped below the floor.
    #[error("step size underflow at t = {t}: h = {h:e}")]
    Stiffness { t: f64, h: f64 },

    #[error("no stationary state reached before t = {t_max}, last residual {residual:e}")]
    Timeout { t_max: f64, residual: f64 },

    #[error("stationary state is not unique: {multiplicity} null eigenvalues")]
    NonUniqueSteadyState {
        multiplicity: usize,
        eigenvalues: Vec<Complex64>,
    },

    #[error("dimension {dim} exceeds the limit {limit}")]
    Capacity { dim: usize, limit: usize },

    #[error("parameters are dynamically unstable (zeta = {zeta})")]
    Unstable { zeta: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
