//! Canonical coordinates `(v, w) = ρ(x, y)` for the unperturbed rescaled fold
//! `x' = -y + x²`, `y' = x` on `U = {2y - 2x² + 1 > 0}`, the Hamiltonian `Ĥ`
//! and the symplectic Euler scheme.

use crate::conserved::{first_integral, phi_h};
use crate::error::{CanardError, Result};
use crate::integrators::{p0, PlanarState};
use crate::linalg::{mat2_det, Mat2};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HamiltonianState {
    pub v: f64,
    pub w: f64,
}

impl HamiltonianState {
    pub fn new(v: f64, w: f64) -> Self {
        Self { v, w }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.w.is_finite()
    }
}

/// `φ(x, y) = 2y - 2x² + 1`, positive exactly on `U`.
pub fn u_density(x: f64, y: f64) -> f64 {
    2.0 * y - 2.0 * x * x + 1.0
}

/// `ρ(x, y) = (x/2 - x² + y, ln(2y - 2x² + 1))`.
pub fn rho(x: f64, y: f64) -> Result<HamiltonianState> {
    let phi = u_density(x, y);
    if !(phi > 0.0) {
        return Err(CanardError::Domain(format!("({x}, {y}) is outside U: 2y - 2x^2 + 1 = {phi}")));
    }
    Ok(HamiltonianState::new(0.5 * x - x * x + y, phi.ln()))
}

pub fn rho_inv(v: f64, w: f64) -> PlanarState {
    let e = w.exp();
    PlanarState::new(2.0 * v - e + 1.0, -1.5 * e + 0.5 + 4.0 * v * (1.0 + v - e) + e * e)
}

pub fn h_hat(v: f64, w: f64) -> f64 {
    let e = w.exp();
    (1.0 + 4.0_f64.ln()) / 4.0 + 0.5 * e * e + 2.0 * v - 0.25 * w + 2.0 * v * v - 0.25 * e * (8.0 * v + 3.0)
}

/// `(∂Ĥ/∂v, ∂Ĥ/∂w)`.
pub fn h_hat_gradient(v: f64, w: f64) -> [f64; 2] {
    let e = w.exp();
    [2.0 + 4.0 * v - 2.0 * e, e * e - 0.25 - 0.25 * e * (8.0 * v + 3.0)]
}

/// `(v', w') = (-∂Ĥ/∂w, ∂Ĥ/∂v)`.
pub fn hamiltonian_vf(v: f64, w: f64) -> [f64; 2] {
    let e = w.exp();
    [0.25 * (-4.0 * e * e + 1.0 + e * (8.0 * v + 3.0)), 4.0 * v - 2.0 * e + 2.0]
}

/// `Ĥ(ρ(x, y)) + ¼ ln H(x, y)`, identically zero on `U`.
pub fn identity_residual(x: f64, y: f64) -> Result<f64> {
    let s = rho(x, y)?;
    Ok(h_hat(s.v, s.w) + 0.25 * first_integral(x, y).ln())
}

/// Symplectic Euler: `v⁺ = v - h ∂Ĥ/∂w(v⁺, w)`, `w⁺ = w + h ∂Ĥ/∂v(v⁺, w)`.
///
/// `∂Ĥ/∂w` is affine in `v`, so the implicit stage is solved in closed form.
pub fn symplectic_euler_step(s: HamiltonianState, h: f64) -> Result<HamiltonianState> {
    let e = s.w.exp();
    let den = 1.0 - 2.0 * h * e;
    if den.abs() < 1e-14 {
        return Err(CanardError::SingularStep { state: vec![s.v, s.w], h });
    }
    let v = (s.v - h * e * e + 0.25 * h + 0.75 * h * e) / den;
    Ok(HamiltonianState::new(v, s.w + h * (2.0 + 4.0 * v - 2.0 * e)))
}

/// `(v₀, …, v_steps)`; stops early at a singular step.
pub fn symplectic_orbit(s0: HamiltonianState, h: f64, steps: usize) -> (Vec<HamiltonianState>, Option<CanardError>) {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(s0);
    let mut s = s0;
    for _ in 0..steps {
        match symplectic_euler_step(s, h) {
            Ok(n) if n.is_finite() => {
                out.push(n);
                s = n;
            }
            Ok(_) => return (out, Some(CanardError::Domain("non-finite iterate".into()))),
            Err(e) => return (out, Some(e)),
        }
    }
    (out, None)
}

/// Central-difference Jacobian of a planar map, step `d`.
pub fn fd_jacobian<F>(f: F, z: [f64; 2], d: f64) -> Result<Mat2>
where
    F: Fn([f64; 2]) -> Result<[f64; 2]>,
{
    let mut j = [[0.0; 2]; 2];
    for i in 0..2 {
        let (mut zp, mut zm) = (z, z);
        zp[i] += d;
        zm[i] -= d;
        let (fp, fm) = (f(zp)?, f(zm)?);
        for k in 0..2 {
            j[k][i] = (fp[k] - fm[k]) / (2.0 * d);
        }
    }
    Ok(j)
}

/// `det Dρ(x, y)` by central differences.
pub fn rho_det_fd(x: f64, y: f64) -> Result<f64> {
    let j = fd_jacobian(|z| rho(z[0], z[1]).map(|s| [s.v, s.w]), [x, y], 1e-6)?;
    Ok(mat2_det(&j))
}

/// Closed form `det Dρ = 1 / (2y - 2x² + 1)`.
pub fn rho_det_exact(x: f64, y: f64) -> Result<f64> {
    rho(x, y)?;
    Ok(1.0 / u_density(x, y))
}

/// Step Jacobian determinant by central differences.
pub fn symplectic_step_det_fd(s: HamiltonianState, h: f64) -> Result<f64> {
    let j = fd_jacobian(
        |z| symplectic_euler_step(HamiltonianState::new(z[0], z[1]), h).map(|t| [t.v, t.w]),
        [s.v, s.w],
        1e-6,
    )?;
    Ok(mat2_det(&j))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugatedDet {
    /// Jacobian determinant of `ρ ∘ P⁰ ∘ ρ⁻¹` at `ρ(z)`, by central differences.
    pub finite_difference: f64,
    /// `φ(z) φ_h(P⁰ z) / (φ(P⁰ z) φ_h(z))`.
    pub predicted: f64,
}

/// Area distortion of the Kahan map `P⁰` in canonical coordinates.
pub fn conjugated_p0_det(x: f64, y: f64, h: f64) -> Result<ConjugatedDet> {
    let s = rho(x, y)?;
    let conj = |z: [f64; 2]| -> Result<[f64; 2]> {
        let q = rho_inv(z[0], z[1]);
        let t = p0(q, h)?;
        rho(t.x, t.y).map(|r| [r.v, r.w])
    };
    let fd = mat2_det(&fd_jacobian(conj, [s.v, s.w], 1e-6)?);
    let t = p0(PlanarState::new(x, y), h)?;
    let (ph0, ph1) = (phi_h(x, y, h), phi_h(t.x, t.y, h));
    if ph0.abs() < 1e-14 {
        return Err(CanardError::SingularDensity { x, y });
    }
    let predicted = u_density(x, y) * ph1 / (u_density(t.x, t.y) * ph0);
    Ok(ConjugatedDet { finite_difference: fd, predicted })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftReport {
    pub steps: usize,
    pub h: f64,
    pub h0: f64,
    /// `max |Ĥ(v_n, w_n) - Ĥ(v_0, w_0)|`.
    pub max_drift: f64,
    /// Mean drift over the first and last tenth of the run; equal up to oscillation when there is no secular trend.
    pub early_mean: f64,
    pub late_mean: f64,
    pub completed: bool,
}

pub fn drift_report(s0: HamiltonianState, h: f64, steps: usize) -> DriftReport {
    let (orbit, err) = symplectic_orbit(s0, h, steps);
    let h0 = h_hat(s0.v, s0.w);
    let drift: Vec<f64> = orbit.iter().map(|s| h_hat(s.v, s.w) - h0).collect();
    let tenth = (drift.len() / 10).max(1);
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    DriftReport {
        steps: orbit.len() - 1,
        h,
        h0,
        max_drift: drift.iter().fold(0.0_f64, |m, d| m.max(d.abs())),
        early_mean: mean(&drift[..tenth]),
        late_mean: mean(&drift[drift.len() - tenth..]),
        completed: err.is_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_values() {
        assert_eq!(rho(0.0, 0.0).unwrap(), HamiltonianState::new(0.0, 0.0));
        let s = rho(0.0, 0.5).unwrap();
        assert!((s.v - 0.5).abs() < 1e-15 && (s.w - 2.0_f64.ln()).abs() < 1e-15);
        assert!(matches!(rho(1.0, 0.0), Err(CanardError::Domain(_))));
        assert!(rho(0.0, -0.5).is_err());
    }

    #[test]
    fn rho_inv_values() {
        let p = rho_inv(0.0, 0.0);
        assert!(p.x.abs() < 1e-15 && p.y.abs() < 1e-15);
        let p = rho_inv(0.5, 2.0_f64.ln());
        assert!(p.x.abs() < 1e-15 && (p.y - 0.5).abs() < 1e-14);
        let q = rho_inv(0.2, -0.3);
        let s = rho(q.x, q.y).unwrap();
        assert!((s.v - 0.2).abs() < 1e-14 && (s.w + 0.3).abs() < 1e-14);
    }

    #[test]
    fn h_hat_at_origin() {
        assert!((h_hat(0.0, 0.0) - 4.0_f64.ln() / 4.0).abs() < 1e-15);
        assert!(identity_residual(0.0, 0.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn identity_on_grid() {
        for i in 0..20 {
            for j in 0..20 {
                let x = -1.5 + 3.0 * i as f64 / 19.0;
                let y = x * x - 0.45 + 2.0 * j as f64 / 19.0;
                assert!(identity_residual(x, y).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vector_field_is_hamiltonian_and_pushforward() {
        assert_eq!(hamiltonian_vf(0.0, 0.0), [0.0, 0.0]);
        for &(x, y) in &[(0.3, 0.2), (-0.5, 0.4), (0.1, -0.2), (1.2, 1.5)] {
            let s = rho(x, y).unwrap();
            let f = hamiltonian_vf(s.v, s.w);
            let g = h_hat_gradient(s.v, s.w);
            assert!((f[0] + g[1]).abs() < 1e-12 && (f[1] - g[0]).abs() < 1e-12);
            let d = 1e-6;
            let gw = (h_hat(s.v, s.w + d) - h_hat(s.v, s.w - d)) / (2.0 * d);
            let gv = (h_hat(s.v + d, s.w) - h_hat(s.v - d, s.w)) / (2.0 * d);
            assert!((f[0] + gw).abs() < 1e-8 && (f[1] - gv).abs() < 1e-8);
            let j = fd_jacobian(|z| rho(z[0], z[1]).map(|r| [r.v, r.w]), [x, y], 1e-6).unwrap();
            let k = [-y + x * x, x];
            let push = [j[0][0] * k[0] + j[0][1] * k[1], j[1][0] * k[0] + j[1][1] * k[1]];
            assert!((push[0] - f[0]).abs() < 1e-8 && (push[1] - f[1]).abs() < 1e-8);
        }
    }

    #[test]
    fn rho_determinant_is_inverse_density() {
        for &(x, y) in &[(0.3, 0.2), (-0.5, 0.4), (0.0, 0.0), (0.7, 3.0)] {
            let fd = rho_det_fd(x, y).unwrap();
            assert!((fd - rho_det_exact(x, y).unwrap()).abs() < 1e-8);
        }
        assert!((rho_det_fd(0.0, 0.0).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn symplectic_step_properties() {
        for &h in &[0.01, 0.1, 0.3] {
            assert_eq!(symplectic_euler_step(HamiltonianState::default(), h).unwrap(), HamiltonianState::default());
        }
        for &(v, w) in &[(0.1, 0.0), (-0.2, 0.3), (0.05, -0.4)] {
            let d = symplectic_step_det_fd(HamiltonianState::new(v, w), 0.01).unwrap();
            assert!((d - 1.0).abs() < 1e-7);
        }
        let w = (1.0_f64 / 0.2).ln();
        assert!(matches!(
            symplectic_euler_step(HamiltonianState::new(0.0, w), 0.1),
            Err(CanardError::SingularStep { .. })
        ));
    }

    #[test]
    fn step_solves_implicit_scheme() {
        let (s, h) = (HamiltonianState::new(0.13, -0.21), 0.05);
        let t = symplectic_euler_step(s, h).unwrap();
        let g = h_hat_gradient(t.v, s.w);
        assert!((t.v - (s.v - h * g[1])).abs() < 1e-15);
        assert!((t.w - (s.w + h * g[0])).abs() < 1e-15);
    }

    #[test]
    fn drift_bounded() {
        let r = drift_report(HamiltonianState::new(0.1, 0.0), 0.01, 10_000);
        assert!(r.completed);
        assert!(r.max_drift < 0.05);
        assert!((r.late_mean - r.early_mean).abs() < 0.01);
    }

    #[test]
    fn kahan_not_area_preserving_in_canonical_coordinates() {
        let c = conjugated_p0_det(0.3, 0.1, 0.2).unwrap();
        assert!((c.finite_difference - c.predicted).abs() < 1e-6);
        assert!((c.predicted - 1.0).abs() > 1e-3);
    }
}
