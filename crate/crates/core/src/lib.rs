//! Euler and Kahan discretizations of the planar fold with canard point.
//!
//! - [`algebra`]: exact rational polynomials and truncated series in `h`.
//! - [`integrators`]: Kahan/Euler steppers and the canard maps.
//! - [`blowup`]: charts K1/K2 and the desingularized K1 map.
//! - [`conserved`]: first integral, invariant parabola, formal conserved quantity.
//! - [`melnikov`]: adjoint orbit, Melnikov sums, critical parameter estimate.
//! - [`hamiltonian`]: canonical coordinates and the symplectic Euler scheme.

pub mod algebra;
pub mod blowup;
pub mod conserved;
pub mod error;
pub mod hamiltonian;
pub mod integrators;
mod linalg;
pub mod melnikov;

pub use error::{CanardError, Result};
pub use linalg::Mat2;
