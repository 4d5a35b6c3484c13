use thiserror::Error;

use crate::algebra::AlgebraError;

/// Errors raised by the numerical layers of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CanardError {
    /// The linear system of an implicit step is singular: the orbit hit a pole of the map.
    #[error("singular step at z = {state:?} with h = {h}")]
    SingularStep { state: Vec<f64>, h: f64 },

    #[error("step size must be nonzero")]
    ZeroStep,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("density vanishes at ({x}, {y}); point lies on the invariant curve")]
    SingularDensity { x: f64, y: f64 },

    /// Telescope residual of the adjoint pairing exceeded the contamination threshold.
    #[error("adjoint contamination at n = {n}: residual {residual:e} exceeds {threshold:e}")]
    Contamination { n: i64, residual: f64, threshold: f64 },

    #[error("degenerate result: {0}")]
    Degenerate(String),

    #[error("shooting failed: {0}")]
    Shooting(String),

    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Result<T> = std::result::Result<T, CanardError>;
