//! Exact rational algebra: bivariate polynomials, truncated power series in
//! the step size, and a rational row-reduction solver.
//!
//! Everything here works over [`Rational`] so that coefficient matching is
//! exact. Floats only enter through the `eval_f64` helpers.

mod linsolve;
mod poly;
mod series;

pub use linsolve::{solve_exact, ExactSolution};
pub use poly::{Poly, Var};
pub use series::HSeries;

use thiserror::Error;

/// Arbitrary-precision rational, always in lowest terms with a positive denominator.
pub type Rational = num::BigRational;

/// Default truncation order for series computations.
pub const DEFAULT_TRUNCATION: usize = 6;
/// Default bound on total polynomial degree inside series arithmetic.
pub const DEFAULT_MAX_DEGREE: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("truncation orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("series is not invertible: {0}")]
    NotInvertible(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("polynomial degree {degree} exceeds the configured maximum {max}")]
    DegreeOverflow { degree: u32, max: u32 },

    #[error("linear system is inconsistent (rank {rank}, augmented rank {augmented_rank})")]
    Inconsistent { rank: usize, augmented_rank: usize },

    #[error("derivation failed at order {order}: {reason}")]
    DerivationFailure { order: usize, reason: String },

    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

/// Build a rational from a small integer fraction.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}
