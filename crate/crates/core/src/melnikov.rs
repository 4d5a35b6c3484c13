//! Discrete Melnikov sums along the separatrix `γ_h` of `P⁰`.
//!
//! The adjoint solution `ψ_h` is iterated from `ψ_h(0) = (0, 1)` with the
//! exact Jacobian of `P⁰`. The perturbation fields `Ĵ = ∂λ` and `Ĝ = ∂r` of
//! the rescaled Kahan map are exact derivatives (implicit differentiation of
//! the Kahan relation), not finite differences.

use std::f64::consts::PI;

use crate::conserved::gamma_h;
use crate::error::{CanardError, Result};
use crate::integrators::{k2_kahan_map, p0, p0_denominator, Coefficients, PlanarState};
use crate::linalg::{dot2, mat2_inverse, mat2_mul_vec, mat2_transpose, Mat2, PIVOT_TOLERANCE};

/// Absolute per-step telescope residual above which the sums are rejected.
pub const CONTAMINATION_THRESHOLD: f64 = 1e-8;

/// `√(2π)`: magnitude of the continuous-time λ-integral.
pub fn sqrt_two_pi() -> f64 {
    (2.0 * PI).sqrt()
}

fn check_pole(x: f64, y: f64, h: f64) -> Result<f64> {
    let d = p0_denominator(x, h);
    if d.abs() < PIVOT_TOLERANCE * 1.0_f64.max((h * x).abs()) {
        return Err(CanardError::SingularStep { state: vec![x, y], h });
    }
    Ok(d)
}

/// Closed-form Jacobian of `P⁰`.
pub fn p0_jacobian(x: f64, y: f64, h: f64) -> Result<Mat2> {
    let d = check_pole(x, y, h)?;
    let (h2, h3, h4) = (h * h, h * h * h, h * h * h * h);
    let d2 = d * d;
    Ok([
        [(1.0 - h2 * y - h4 / 16.0) / d2, -h / d],
        [
            (h - h2 * x + 0.25 * h3 * (2.0 * x * x - 2.0 * y + 1.0) - 0.25 * h4 * x) / d2,
            (1.0 - h * x - 0.25 * h2) / d,
        ],
    ])
}

/// `Ĵ(x, h) = (h²/2, h² x - h) / (1 - h x + h²/4)`.
pub fn hat_j(x: f64, h: f64) -> Result<[f64; 2]> {
    let d = check_pole(x, 0.0, h)?;
    Ok([0.5 * h * h / d, (h * h * x - h) / d])
}

/// `∂r` of the rescaled Kahan map at `r = λ = 0`.
///
/// Differentiating the Kahan relation gives
/// `(Id - h/2 Df₀(z)) ∂r z̃ = h ḡ(z, z̃)` with `ḡ` the polarized perturbation
/// field `(a1 x - a2 x y, a4 x² + a5 y)` and `z̃ = P⁰(z)`.
pub fn hat_g(x: f64, y: f64, h: f64, a: &Coefficients) -> Result<[f64; 2]> {
    let d = check_pole(x, y, h)?;
    if a.is_zero() {
        return Ok([0.0, 0.0]);
    }
    let t = p0(PlanarState::new(x, y), h)?;
    let g1 = 0.5 * a.a1 * (x + t.x) - 0.5 * a.a2 * (x * t.y + t.x * y);
    let g2 = a.a4 * x * t.x + 0.5 * a.a5 * (y + t.y);
    // (Id - h/2 Df₀)^{-1} = [[1, -h/2], [h/2, 1 - h x]] / d
    Ok([h * (g1 - 0.5 * h * g2) / d, h * (0.5 * h * g1 + (1.0 - h * x) * g2) / d])
}

/// Printed closed form of `Ĝ` for `a = (1, 0, 0, 0)`.
pub fn hat_g_a1(x: f64, y: f64, h: f64) -> Result<[f64; 2]> {
    let d = check_pole(x, y, h)?;
    let d2 = d * d;
    Ok([
        (h * x - 0.5 * h * h * y - 0.5 * h * h * x * x) / d2,
        (0.5 * h * h * x - 0.25 * h * h * h * y - 0.25 * h * h * h * x * x) / d2,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointState {
    pub n: i64,
    pub psi: [f64; 2],
}

/// `ψ_h(n)` for `n ∈ [-N, N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointOrbit {
    pub h: f64,
    pub n_max: i64,
    pub states: Vec<AdjointState>,
    /// `max |⟨ψ_h(n), (1, h n)⟩|`: pairing with the tangent of the orbit family
    /// on `S_h`, which the adjoint recursion preserves exactly.
    pub tangent_residual: f64,
}

impl AdjointOrbit {
    pub fn psi(&self, n: i64) -> [f64; 2] {
        self.states[(n + self.n_max) as usize].psi
    }
}

/// Iterate `ψ(n+1) = (DF(γ(n))ᵀ)⁻¹ ψ(n)` forward and `ψ(n-1) = DF(γ(n-1))ᵀ ψ(n)` backward from `ψ(0) = (0, 1)`.
pub fn adjoint_orbit(h: f64, n_max: i64) -> Result<AdjointOrbit> {
    if n_max < 1 || !(h > 0.0) {
        return Err(CanardError::InvalidParameter(format!("need N >= 1 and h > 0 (N = {n_max}, h = {h})")));
    }
    let len = (2 * n_max + 1) as usize;
    let mut psi = vec![[0.0; 2]; len];
    let idx = |n: i64| (n + n_max) as usize;
    psi[idx(0)] = [0.0, 1.0];
    for n in 0..n_max {
        let g = gamma_h(n, h);
        let jt = mat2_transpose(&p0_jacobian(g.x, g.y, h)?);
        let inv = mat2_inverse(&jt).ok_or_else(|| CanardError::SingularStep { state: vec![g.x, g.y], h })?;
        psi[idx(n + 1)] = mat2_mul_vec(&inv, psi[idx(n)]);
    }
    for n in (1 - n_max..=0).rev() {
        let g = gamma_h(n - 1, h);
        let jt = mat2_transpose(&p0_jacobian(g.x, g.y, h)?);
        psi[idx(n - 1)] = mat2_mul_vec(&jt, psi[idx(n)]);
    }
    let mut tangent_residual = 0.0_f64;
    let states = psi
        .into_iter()
        .enumerate()
        .map(|(k, p)| {
            let n = k as i64 - n_max;
            tangent_residual = tangent_residual.max(dot2(p, [1.0, h * n as f64]).abs());
            AdjointState { n, psi: p }
        })
        .collect();
    if tangent_residual > CONTAMINATION_THRESHOLD {
        return Err(CanardError::Contamination {
            n: n_max,
            residual: tangent_residual,
            threshold: CONTAMINATION_THRESHOLD,
        });
    }
    Ok(AdjointOrbit { h, n_max, states, tangent_residual })
}

/// Continuous decaying adjoint `ψ(t) = (-t e^{-t²/2}, e^{-t²/2})`.
pub fn psi_continuous(t: f64) -> [f64; 2] {
    let e = (-0.5 * t * t).exp();
    [-t * e, e]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelnikovResult {
    pub h: f64,
    pub n: i64,
    /// Raw sum `Σ ⟨ψ_h(n+1), Ĵ(γ_h(n))⟩`. `Ĵ = O(h)`, so this already approximates the integral `-√(2π)`.
    pub d_lambda: f64,
    /// Raw sum `Σ ⟨ψ_h(n+1), Ĝ(γ_h(n))⟩`, approximating `-C √(2π)`.
    pub d_r: f64,
    pub boundary_corrected: bool,
    pub a: Coefficients,
    /// Largest per-step violation of `⟨ψ(n+1), w(n+1)⟩ - ⟨ψ(n), w(n)⟩ = ⟨ψ(n+1), G(γ(n))⟩`.
    pub telescope_residual: f64,
}

impl MelnikovResult {
    pub fn d_lambda_over_h(&self) -> f64 {
        self.d_lambda / self.h
    }

    pub fn d_r_over_h(&self) -> f64 {
        self.d_r / self.h
    }

    /// Continuous targets `(-√(2π), -C √(2π))`.
    pub fn targets(&self) -> (f64, f64) {
        (-sqrt_two_pi(), -self.a.canard_constant() * sqrt_two_pi())
    }

    pub fn err_lambda(&self) -> f64 {
        self.d_lambda - self.targets().0
    }

    pub fn err_r(&self) -> f64 {
        self.d_r - self.targets().1
    }
}

/// Variational sums via the two half-line recursions `w₋` (from `-N`) and `w₊` (from `N`).
struct Variational {
    value: f64,
    residual: f64,
}

fn variational_route<F>(orbit: &AdjointOrbit, forcing: F) -> Result<Variational>
where
    F: Fn(PlanarState) -> Result<[f64; 2]>,
{
    let (h, n_max) = (orbit.h, orbit.n_max);
    let mut residual = 0.0_f64;
    // w₋(-N) = 0, forward to 0
    let mut w = [0.0; 2];
    for n in -n_max..0 {
        let g = gamma_h(n, h);
        let j = p0_jacobian(g.x, g.y, h)?;
        let f = forcing(g)?;
        let jw = mat2_mul_vec(&j, w);
        let next = [jw[0] + f[0], jw[1] + f[1]];
        let lhs = dot2(orbit.psi(n + 1), next) - dot2(orbit.psi(n), w);
        residual = residual.max((lhs - dot2(orbit.psi(n + 1), f)).abs());
        w = next;
    }
    let w_minus = w;
    // w₊(N) = 0, backward to 0: w(n) = DF(γ(n))⁻¹ (w(n+1) - G(γ(n)))
    let mut w = [0.0; 2];
    for n in (0..n_max).rev() {
        let g = gamma_h(n, h);
        let j = p0_jacobian(g.x, g.y, h)?;
        let inv = mat2_inverse(&j).ok_or_else(|| CanardError::SingularStep { state: vec![g.x, g.y], h })?;
        let f = forcing(g)?;
        let prev = mat2_mul_vec(&inv, [w[0] - f[0], w[1] - f[1]]);
        let lhs = dot2(orbit.psi(n + 1), w) - dot2(orbit.psi(n), prev);
        residual = residual.max((lhs - dot2(orbit.psi(n + 1), f)).abs());
        w = prev;
    }
    let value = dot2(orbit.psi(0), [w_minus[0] - w[0], w_minus[1] - w[1]]);
    Ok(Variational { value, residual })
}

fn direct_sum<F>(orbit: &AdjointOrbit, forcing: F) -> Result<f64>
where
    F: Fn(PlanarState) -> Result<[f64; 2]>,
{
    let mut acc = 0.0;
    for n in -orbit.n_max..orbit.n_max {
        acc += dot2(orbit.psi(n + 1), forcing(gamma_h(n, orbit.h))?);
    }
    Ok(acc)
}

/// Finite Melnikov sums over `n ∈ [-N, N-1]`.
///
/// The telescope identity is monitored on both half-lines; a residual above
/// [`CONTAMINATION_THRESHOLD`] aborts with a contamination error. With
/// `boundary_corrected`, the sums are taken from the variational route
/// `⟨ψ(0), w₋(0) - w₊(0)⟩` plus the boundary terms, which vanish for the
/// zero seeds `w₋(-N) = w₊(N) = 0`.
pub fn melnikov_sums(h: f64, n: i64, a: &Coefficients, boundary_corrected: bool) -> Result<MelnikovResult> {
    let orbit = adjoint_orbit(h, n)?;
    let fj = |g: PlanarState| hat_j(g.x, h);
    let fg = |g: PlanarState| hat_g(g.x, g.y, h, a);
    let vj = variational_route(&orbit, fj)?;
    let vg = variational_route(&orbit, fg)?;
    let residual = vj.residual.max(vg.residual);
    if residual > CONTAMINATION_THRESHOLD {
        return Err(CanardError::Contamination { n, residual, threshold: CONTAMINATION_THRESHOLD });
    }
    let (d_lambda, d_r) = if boundary_corrected {
        (vj.value, vg.value)
    } else {
        (direct_sum(&orbit, fj)?, direct_sum(&orbit, fg)?)
    };
    Ok(MelnikovResult {
        h,
        n,
        d_lambda,
        d_r,
        boundary_corrected,
        a: *a,
        telescope_residual: residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaCEstimate {
    pub lambda_c: f64,
    /// Rescaled step `h₂ = h √ε` at which the sums were evaluated.
    pub h2: f64,
    pub sums: MelnikovResult,
}

/// `λ_c ≈ -(d_r / d_λ) ε`, with the sums evaluated at `h₂ = h √ε` and `N = ⌈10 / h₂⌉`.
pub fn lambda_c_estimate(epsilon: f64, h_original: f64, a: &Coefficients) -> Result<LambdaCEstimate> {
    if !(epsilon > 0.0) || !(h_original > 0.0) {
        return Err(CanardError::InvalidParameter(format!(
            "need epsilon > 0 and h > 0 (got {epsilon}, {h_original})"
        )));
    }
    let h2 = h_original * epsilon.sqrt();
    let n = (10.0 / h2).ceil() as i64;
    let sums = melnikov_sums(h2, n, a, false)?;
    if sums.d_lambda == 0.0 {
        return Err(CanardError::Degenerate("d_lambda vanishes".into()));
    }
    let lambda_c = if sums.d_r == 0.0 { 0.0 } else { -(sums.d_r / sums.d_lambda) * epsilon };
    Ok(LambdaCEstimate { lambda_c, h2, sums })
}

/// Secondary estimator with `∇H` in place of a conserved quantity:
/// `Σ_{n=1-M}^{M} ∇H(γ_h(n)) · (Ĵ, Ĝ)(γ_h(n-1))`.
///
/// It approximates the separation measured in `H`, which near `(0, -½)` is
/// `e/2` times the `y`-gap, so only ratios are comparable with the adjoint sums.
pub fn h_gradient_sums(h: f64, m: i64, a: &Coefficients) -> Result<(f64, f64)> {
    let grad = |s: PlanarState| {
        let w = (-2.0 * s.y).exp();
        [-s.x * w, (s.x * s.x - s.y) * w]
    };
    let (mut dl, mut dr) = (0.0, 0.0);
    for n in (1 - m)..=m {
        let g = grad(gamma_h(n, h));
        let prev = gamma_h(n - 1, h);
        dl += dot2(g, hat_j(prev.x, h)?);
        dr += dot2(g, hat_g(prev.x, prev.y, h, a)?);
    }
    Ok((dl, dr))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingConfig {
    /// Shooting starts at `γ_h(∓M)` with `x = ∓x_far`.
    pub x_far: f64,
    /// Iteration cap as a multiple of `M`.
    pub cap_factor: i64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self { x_far: 6.0, cap_factor: 10 }
    }
}

/// Cubic Lagrange interpolation of `y` at `x = 0` through four samples.
fn interpolate_at_zero(pts: &[PlanarState]) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let mut w = 1.0;
        for j in 0..4 {
            if j != i {
                w *= (0.0 - pts[j].x) / (pts[i].x - pts[j].x);
            }
        }
        acc += w * pts[i].y;
    }
    acc
}

fn shoot(h: f64, lambda: f64, r: f64, a: &Coefficients, forward: bool, cfg: &ShootingConfig) -> Result<f64> {
    let m = (2.0 * cfg.x_far / h).round() as i64;
    let start = gamma_h(if forward { -m } else { m }, h);
    let step_h = if forward { h } else { -h };
    let crossed = |s: &PlanarState| if forward { s.x > 0.0 } else { s.x <= 0.0 };
    let mut hist = vec![start];
    let mut cross_at = None;
    let cap = cfg.cap_factor * m.max(1);
    for k in 0..cap {
        let s = *hist.last().expect("nonempty");
        let next = k2_kahan_map(step_h, lambda, r, a, s).map_err(|e| {
            CanardError::Shooting(format!(
                "{} shot hit a pole after {k} steps at ({}, {}): {e}",
                if forward { "forward" } else { "backward" },
                s.x,
                s.y
            ))
        })?;
        if !next.is_finite() {
            return Err(CanardError::Shooting(format!("orbit diverged after {k} steps")));
        }
        hist.push(next);
        if cross_at.is_none() && crossed(&next) {
            cross_at = Some(hist.len() - 1);
        }
        if let Some(c) = cross_at {
            if hist.len() > c + 1 && c >= 2 {
                return Ok(interpolate_at_zero(&hist[c - 2..c + 2]));
            }
        }
    }
    Err(CanardError::Shooting(format!("no crossing of x = 0 within {cap} steps")))
}

/// `y_a(0) - y_r(0)`: forward shot from the far left minus backward shot from the far right.
pub fn shooting_gap(h: f64, lambda: f64, r: f64, a: &Coefficients, cfg: &ShootingConfig) -> Result<f64> {
    Ok(shoot(h, lambda, r, a, true, cfg)? - shoot(h, lambda, r, a, false, cfg)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub h: f64,
    pub a: Coefficients,
    /// `(r, λ, gap)` samples.
    pub samples: Vec<(f64, f64, f64)>,
    pub fit_d_lambda: f64,
    pub fit_d_r: f64,
    pub sums: MelnikovResult,
    /// `|fit - sum| / |sum|` for `d_λ`.
    pub rel_err_lambda: f64,
    /// Relative error for `d_r`; absolute when the sum vanishes.
    pub rel_err_r: f64,
}

/// Fit `gap ≈ d_λ λ + d_r r` over a grid of shooting gaps and compare with the sums.
pub fn distance_expansion_check(h: f64, a: &Coefficients, grid: &[(f64, f64)]) -> Result<DistanceReport> {
    if grid.iter().any(|&(r, l)| r.abs() > 0.05 || l.abs() > 0.05) {
        return Err(CanardError::InvalidParameter("grid entries must satisfy |r|, |lambda| <= 0.05".into()));
    }
    let cfg = ShootingConfig::default();
    let mut samples = Vec::with_capacity(grid.len());
    for &(r, l) in grid {
        samples.push((r, l, shooting_gap(h, l, r, a, &cfg)?));
    }
    let (mut sll, mut srr, mut slr, mut sgl, mut sgr) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(r, l, g) in &samples {
        sll += l * l;
        srr += r * r;
        slr += l * r;
        sgl += g * l;
        sgr += g * r;
    }
    let det = sll * srr - slr * slr;
    if det.abs() < 1e-300 {
        return Err(CanardError::Degenerate("grid does not span both parameters".into()));
    }
    let fit_d_lambda = (sgl * srr - sgr * slr) / det;
    let fit_d_r = (sgr * sll - sgl * slr) / det;
    let n = (10.0 / h).ceil() as i64;
    let sums = melnikov_sums(h, n, a, false)?;
    let rel = |fit: f64, s: f64| if s == 0.0 { fit.abs() } else { ((fit - s) / s).abs() };
    Ok(DistanceReport {
        h,
        a: *a,
        rel_err_lambda: rel(fit_d_lambda, sums.d_lambda),
        rel_err_r: rel(fit_d_r, sums.d_r),
        samples,
        fit_d_lambda,
        fit_d_r,
        sums,
    })
}

/// Symmetric 5×5 grid over `{-2s, -s, 0, s, 2s}²`.
pub fn default_grid(s: f64) -> Vec<(f64, f64)> {
    let v = [-2.0 * s, -s, 0.0, s, 2.0 * s];
    v.iter().flat_map(|&r| v.iter().map(move |&l| (r, l))).collect()
}
