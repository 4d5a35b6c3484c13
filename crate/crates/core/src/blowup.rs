//! Blow-up charts K1 and K2, the desingularized K1 Kahan map and the
//! linear analysis at its fixed points `x1 = ±1`.

use crate::error::{CanardError, Result};
use crate::integrators::{canard_kahan_map, CanardParams, Coefficients, PlanarState};

/// Entry chart: `x = r1 x1, y = r1², ε = r1² ε1, λ = r1 λ1, h = h1 / r1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChartPointK1 {
    pub x1: f64,
    pub r1: f64,
    pub eps1: f64,
    pub lambda1: f64,
    pub h1: f64,
}

/// Rescaling chart: `x = r2 x2, y = r2² y2, ε = r2², λ = r2 λ2, h = h2 / r2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChartPointK2 {
    pub x2: f64,
    pub y2: f64,
    pub r2: f64,
    pub lambda2: f64,
    pub h2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginalPoint {
    pub x: f64,
    pub y: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub h: f64,
}

/// Box `0 ≤ r1 ≤ ρ, 0 ≤ ε1 ≤ δ, 0 ≤ h1 ≤ ν` with `ν < 1`.
///
/// The sharper bound `ν < 2K / (1 + K²)` tied to the attracting-slow-manifold
/// constant is not enforced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainD1 {
    pub rho: f64,
    pub delta: f64,
    pub nu: f64,
}

impl Default for DomainD1 {
    fn default() -> Self {
        Self { rho: 1.0, delta: 1.0, nu: 0.9 }
    }
}

impl DomainD1 {
    pub fn new(rho: f64, delta: f64, nu: f64) -> Result<Self> {
        if !(rho > 0.0 && delta > 0.0 && nu > 0.0 && nu < 1.0) {
            return Err(CanardError::InvalidParameter(format!(
                "domain needs rho, delta > 0 and 0 < nu < 1 (got {rho}, {delta}, {nu})"
            )));
        }
        Ok(Self { rho, delta, nu })
    }

    pub fn contains(&self, p: &ChartPointK1) -> bool {
        (0.0..=self.rho).contains(&p.r1)
            && (0.0..=self.delta).contains(&p.eps1)
            && (0.0..=self.nu).contains(&p.h1)
    }

    /// Construct a chart point, rejecting it if it leaves the box.
    pub fn point(&self, x1: f64, r1: f64, eps1: f64, lambda1: f64, h1: f64) -> Result<ChartPointK1> {
        let p = ChartPointK1 { x1, r1, eps1, lambda1, h1 };
        if !self.contains(&p) {
            return Err(CanardError::Domain(format!("{p:?} outside D1 {self:?}")));
        }
        Ok(p)
    }
}

pub fn kappa12(p: &ChartPointK1) -> Result<ChartPointK2> {
    if !(p.eps1 > 0.0) {
        return Err(CanardError::Domain(format!("kappa12 needs eps1 > 0, got {}", p.eps1)));
    }
    let s = p.eps1.sqrt();
    Ok(ChartPointK2 {
        x2: p.x1 / s,
        y2: 1.0 / p.eps1,
        r2: p.r1 * s,
        lambda2: p.lambda1 / s,
        h2: p.h1 * s,
    })
}

pub fn kappa21(p: &ChartPointK2) -> Result<ChartPointK1> {
    if !(p.y2 > 0.0) {
        return Err(CanardError::Domain(format!("kappa21 needs y2 > 0, got {}", p.y2)));
    }
    let s = p.y2.sqrt();
    Ok(ChartPointK1 {
        x1: p.x2 / s,
        r1: p.r2 * s,
        eps1: 1.0 / p.y2,
        lambda1: p.lambda2 / s,
        h1: p.h2 * s,
    })
}

pub fn blowdown_k1(p: &ChartPointK1) -> Result<OriginalPoint> {
    if !(p.r1 > 0.0) {
        return Err(CanardError::Domain("h = h1/r1 needs r1 > 0".into()));
    }
    Ok(OriginalPoint {
        x: p.r1 * p.x1,
        y: p.r1 * p.r1,
        epsilon: p.r1 * p.r1 * p.eps1,
        lambda: p.r1 * p.lambda1,
        h: p.h1 / p.r1,
    })
}

pub fn blowdown_k2(p: &ChartPointK2) -> Result<OriginalPoint> {
    if !(p.r2 > 0.0) {
        return Err(CanardError::Domain("h = h2/r2 needs r2 > 0".into()));
    }
    Ok(OriginalPoint {
        x: p.r2 * p.x2,
        y: p.r2 * p.r2 * p.y2,
        epsilon: p.r2 * p.r2,
        lambda: p.r2 * p.lambda2,
        h: p.h2 / p.r2,
    })
}

/// Express an original point with `y > 0` in chart K1.
pub fn to_k1(q: &OriginalPoint) -> Result<ChartPointK1> {
    if !(q.y > 0.0) {
        return Err(CanardError::Domain(format!(
            "image leaves chart K1 (y = {} <= 0)",
            q.y
        )));
    }
    let r1 = q.y.sqrt();
    Ok(ChartPointK1 {
        x1: q.x / r1,
        r1,
        eps1: q.epsilon / q.y,
        lambda1: q.lambda / r1,
        h1: q.h * r1,
    })
}

/// Closed form on the invariant slice `{r1 = 0}`.
fn k1_slice_map(p: &ChartPointK1) -> Result<ChartPointK1> {
    let ChartPointK1 { x1, eps1: e, lambda1: l, h1: h, .. } = *p;
    let h2 = h * h;
    let f = 1.0 - h * x1 + h * e * x1 - 0.5 * h2 * e * x1 * x1 - h * l * e + h2 * x1 * l * e
        - 0.25 * h2 * e;
    let den = 1.0 - h * x1 + 0.25 * h2 * e;
    if den == 0.0 {
        return Err(CanardError::SingularStep { state: vec![x1, 0.0, e, l, h], h });
    }
    let g = f / den;
    if !(g > 0.0) {
        return Err(CanardError::Domain(format!("image leaves chart K1 (G = {g})")));
    }
    let sg = g.sqrt();
    Ok(ChartPointK1 {
        x1: (x1 - h - 0.25 * h2 * e * x1 + 0.5 * h2 * l * e) / (den * sg),
        r1: 0.0,
        eps1: e / g,
        lambda1: l / sg,
        h1: h * sg,
    })
}

/// One iterate of the Kahan map in chart K1.
///
/// For `r1 > 0` the point is blown down, mapped by the original Kahan map
/// and re-expressed in K1. On `{r1 = 0}` the closed form built from
/// `F`, `E` and `G = F / E` is used.
pub fn k1_kahan_map(p: &ChartPointK1, a: &Coefficients) -> Result<ChartPointK1> {
    if p.r1 == 0.0 {
        return k1_slice_map(p);
    }
    let q = blowdown_k1(p)?;
    let params = CanardParams { epsilon: q.epsilon, lambda: q.lambda, h: q.h, a: *a };
    let s = canard_kahan_map(&params, PlanarState::new(q.x, q.y))?;
    to_k1(&OriginalPoint { x: s.x, y: s.y, ..q })
}

/// The slice closed form, exposed for cross-checks against the conjugation route.
pub fn k1_kahan_map_slice(p: &ChartPointK1) -> Result<ChartPointK1> {
    k1_slice_map(&ChartPointK1 { r1: 0.0, ..*p })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K1FixedPoint {
    pub point: ChartPointK1,
    /// Derivative of the x1-map at the point.
    pub derivative: f64,
}

/// `p_a = (-1, 0, 0, 0, h1)` with derivative `α = (1 - h1)/(1 + h1)` and `p_r = (1, 0, 0, 0, h1)` with `1/α`.
pub fn k1_fixed_points(h1: f64) -> Result<(K1FixedPoint, K1FixedPoint)> {
    if !(0.0..1.0).contains(&h1) {
        return Err(CanardError::InvalidParameter(format!("need 0 <= h1 < 1, got {h1}")));
    }
    let alpha = (1.0 - h1) / (1.0 + h1);
    let at = |x1| ChartPointK1 { x1, h1, ..Default::default() };
    Ok((
        K1FixedPoint { point: at(-1.0), derivative: alpha },
        K1FixedPoint { point: at(1.0), derivative: 1.0 / alpha },
    ))
}

/// The map restricted to `{r1 = 0, λ1 = 0}` in coordinates `(x1, ε1, h1)`.
pub fn k1_reduced_map(z: [f64; 3]) -> Result<[f64; 3]> {
    let p = ChartPointK1 { x1: z[0], eps1: z[1], h1: z[2], ..Default::default() };
    let q = k1_slice_map(&p)?;
    Ok([q.x1, q.eps1, q.h1])
}

pub type Mat3 = [[f64; 3]; 3];

/// Central-difference Jacobian with per-coordinate step `1e-6 * max(1, |z_i|)`.
pub fn central_jacobian3<F>(f: F, z: [f64; 3]) -> Result<Mat3>
where
    F: Fn([f64; 3]) -> Result<[f64; 3]>,
{
    let mut j = [[0.0; 3]; 3];
    for i in 0..3 {
        let d = 1e-6 * z[i].abs().max(1.0);
        let (mut zp, mut zm) = (z, z);
        zp[i] += d;
        zm[i] -= d;
        let (fp, fm) = (f(zp)?, f(zm)?);
        for k in 0..3 {
            j[k][i] = (fp[k] - fm[k]) / (2.0 * d);
        }
    }
    Ok(j)
}

fn mat3_vec(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for k in 0..3 {
        out[k] = (0..3).map(|i| m[k][i] * v[i]).sum();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenReport {
    pub h1: f64,
    pub alpha: f64,
    pub jacobian_a: Mat3,
    pub jacobian_r: Mat3,
    /// Max-norm of `J_a v_a - (v_a + (0, 0, -2 h1²))`.
    pub dev_a: f64,
    /// Max-norm of `J_r v_r - (v_r + (0, 0, 2 h1²))`.
    pub dev_r: f64,
    /// Max-norm of `J_r v_r - (v_r + (0, 0, -2 h1²))`, the action implied by
    /// the Jacobian entries themselves (third row `(0, h1²/2, 1)`).
    pub dev_r_from_jacobian: f64,
}

pub const V_A: [f64; 3] = [-1.0, 4.0, 1.0];
pub const V_R: [f64; 3] = [-1.0, -4.0, -1.0];

pub fn k1_jacobian_eigen_check(h1: f64) -> Result<EigenReport> {
    if !(h1 > 0.0 && h1 < 1.0) {
        return Err(CanardError::InvalidParameter(format!("need 0 < h1 < 1, got {h1}")));
    }
    let ja = central_jacobian3(k1_reduced_map, [-1.0, 0.0, h1])?;
    let jr = central_jacobian3(k1_reduced_map, [1.0, 0.0, h1])?;
    let dev = |j: &Mat3, v: [f64; 3], corr: f64| {
        let w = mat3_vec(j, v);
        let target = [v[0], v[1], v[2] + corr];
        (0..3).fold(0.0_f64, |m, k| m.max((w[k] - target[k]).abs()))
    };
    Ok(EigenReport {
        h1,
        alpha: (1.0 - h1) / (1.0 + h1),
        dev_a: dev(&ja, V_A, -2.0 * h1 * h1),
        dev_r: dev(&jr, V_R, 2.0 * h1 * h1),
        dev_r_from_jacobian: dev(&jr, V_R, -2.0 * h1 * h1),
        jacobian_a: ja,
        jacobian_r: jr,
    })
}

/// Image of the special solution `γ_h(n)` in chart K1 (on `{r1 = 0}`).
pub fn special_solution_k1(n: i64, h: f64) -> Result<ChartPointK1> {
    let g = crate::conserved::gamma_h(n, h);
    kappa21(&ChartPointK2 { x2: g.x, y2: g.y, r2: 0.0, lambda2: 0.0, h2: h })
}

/// Distance from a K1 point to the nearer fixed-point line `{x1 = ±1, r1 = ε1 = λ1 = 0}`.
pub fn distance_to_fixed_lines(p: &ChartPointK1) -> f64 {
    let dx = (p.x1 - 1.0).abs().min((p.x1 + 1.0).abs());
    dx.max(p.r1.abs()).max(p.eps1.abs()).max(p.lambda1.abs())
}
