use std::fmt;

use super::{euler_step, kahan_denominator, kahan_step, QuadraticVectorField};
use crate::error::{CanardError, Result};
use crate::algebra::Rational;
use crate::linalg::PIVOT_TOLERANCE;
use num::{One, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarState {
    pub x: f64,
    pub y: f64,
}

impl PlanarState {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn from_slice(z: &[f64]) -> Self {
        Self { x: z[0], y: z[1] }
    }
}

impl From<[f64; 2]> for PlanarState {
    fn from(z: [f64; 2]) -> Self {
        Self { x: z[0], y: z[1] }
    }
}

/// Perturbation coefficients of the quadratic model (`a3` vanishes identically).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coefficients {
    pub a1: f64,
    pub a2: f64,
    pub a4: f64,
    pub a5: f64,
}

impl Coefficients {
    pub const fn new(a1: f64, a2: f64, a4: f64, a5: f64) -> Self {
        Self { a1, a2, a4, a5 }
    }

    pub fn is_zero(&self) -> bool {
        self.a1 == 0.0 && self.a2 == 0.0 && self.a4 == 0.0 && self.a5 == 0.0
    }

    /// `C = (4 a1 - a2 - 2 a4 + 2 a5) / 8`, so that `λ_c ≈ -C ε`.
    pub fn canard_constant(&self) -> f64 {
        (4.0 * self.a1 - self.a2 - 2.0 * self.a4 + 2.0 * self.a5) / 8.0
    }
}

/// Parameters of the maps in original coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanardParams {
    pub epsilon: f64,
    pub lambda: f64,
    pub h: f64,
    pub a: Coefficients,
}

impl CanardParams {
    pub fn new(epsilon: f64, lambda: f64, h: f64, a: Coefficients) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(CanardError::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(CanardError::InvalidParameter(format!("h must be > 0, got {h}")));
        }
        if !lambda.is_finite() {
            return Err(CanardError::InvalidParameter("lambda must be finite".into()));
        }
        Ok(Self { epsilon, lambda, h, a })
    }
}

/// Parameters of the rescaled maps in chart K2 (`ε = r²`, `λ = r λ2`, `h = h2 / r`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K2Params {
    pub h: f64,
    pub lambda2: f64,
    pub r2: f64,
    pub a: Coefficients,
}

impl K2Params {
    pub fn new(h: f64, lambda2: f64, r2: f64, a: Coefficients) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(CanardError::InvalidParameter(format!("h must be > 0, got {h}")));
        }
        if !lambda2.is_finite() || !r2.is_finite() {
            return Err(CanardError::InvalidParameter("lambda2 and r2 must be finite".into()));
        }
        Ok(Self { h, lambda2, r2, a })
    }

    /// The unperturbed rescaled map `P⁰` with step `h`.
    pub fn unperturbed(h: f64) -> Result<Self> {
        Self::new(h, 0.0, 0.0, Coefficients::default())
    }
}

/// Field of the quadratic model in original coordinates:
/// `x' = -y + x² + ε a1 x - a2 x y`, `y' = ε(x - λ) + ε a5 y + ε a4 x²`.
pub fn canard_field(epsilon: f64, lambda: f64, a: &Coefficients) -> QuadraticVectorField {
    QuadraticVectorField::new(
        vec![
            vec![vec![1.0, -0.5 * a.a2], vec![-0.5 * a.a2, 0.0]],
            vec![vec![epsilon * a.a4, 0.0], vec![0.0, 0.0]],
        ],
        vec![vec![epsilon * a.a1, -1.0], vec![epsilon, epsilon * a.a5]],
        vec![0.0, -epsilon * lambda],
    )
    .expect("canard field has consistent shape")
}

/// Field in chart K2: `x' = -y + x² + r(a1 x - a2 x y)`, `y' = x - λ + r(a4 x² + a5 y)`.
pub fn k2_field(lambda2: f64, r2: f64, a: &Coefficients) -> QuadraticVectorField {
    QuadraticVectorField::new(
        vec![
            vec![vec![1.0, -0.5 * r2 * a.a2], vec![-0.5 * r2 * a.a2, 0.0]],
            vec![vec![r2 * a.a4, 0.0], vec![0.0, 0.0]],
        ],
        vec![vec![r2 * a.a1, -1.0], vec![1.0, r2 * a.a5]],
        vec![0.0, -lambda2],
    )
    .expect("chart field has consistent shape")
}

/// Rational closed form of the unperturbed Kahan map; `h` may be negative (inverse).
fn kahan_closed_form(s: PlanarState, epsilon: f64, lambda: f64, h: f64) -> Result<PlanarState> {
    let PlanarState { x, y } = s;
    let h2 = h * h;
    let den = 1.0 - h * x + 0.25 * h2 * epsilon;
    let scale = 1.0_f64.max((1.0 - h * x).abs()).max(0.5 * h.abs());
    if den.abs() < PIVOT_TOLERANCE * scale || !den.is_finite() {
        return Err(CanardError::SingularStep { state: vec![x, y], h });
    }
    let xn = x - h * y - 0.25 * h2 * epsilon * x + 0.5 * h2 * lambda * epsilon;
    let yn = y - h * y * x - 0.5 * h2 * epsilon * x * x - h * lambda * epsilon
        + h2 * x * lambda * epsilon
        + h * epsilon * x
        - 0.25 * h2 * epsilon * y;
    Ok(PlanarState::new(xn / den, yn / den))
}

/// Denominator `1 - h x + h²/4` of `P⁰`.
pub fn p0_denominator(x: f64, h: f64) -> f64 {
    1.0 - h * x + 0.25 * h * h
}

/// The unperturbed rescaled Kahan map `P⁰` (closed form).
pub fn p0(s: PlanarState, h: f64) -> Result<PlanarState> {
    kahan_closed_form(s, 1.0, 0.0, h)
}

/// Residual of the slow-time Kahan relation at `ε = 0` on the critical
/// manifold `y = x²`: `(x̃² - x²)/h - (x̃ + x)/2 + λ`.
///
/// At `λ = 0` it vanishes on both branches `x̃ = x + h/2` and `x̃ = -x`.
pub fn slow_invariance_residual(x: f64, x_next: f64, h: f64, lambda: f64) -> Result<f64> {
    if h == 0.0 {
        return Err(CanardError::ZeroStep);
    }
    Ok((x_next * x_next - x * x) / h - 0.5 * (x_next + x) + lambda)
}

/// `P⁰` in exact rational arithmetic; `None` at the pole `1 - h x + h²/4 = 0`.
pub fn p0_exact(x: &Rational, y: &Rational, h: &Rational) -> Option<(Rational, Rational)> {
    let quarter = Rational::new(1.into(), 4.into());
    let h2q = h * h * &quarter;
    let den = Rational::one() - h * x + &h2q;
    if den.is_zero() {
        return None;
    }
    let xn = x - h * y - &h2q * x;
    let yn = y - h * y * x - (h * h * x * x) / Rational::from_integer(2.into()) + h * x - &h2q * y;
    Some((xn / &den, yn / &den))
}

fn generic_kahan(vf: &QuadraticVectorField, s: PlanarState, h: f64) -> Result<PlanarState> {
    kahan_step(vf, &s.to_array(), h).map(|z| PlanarState::from_slice(&z))
}

/// One forward iterate of the Kahan map in original coordinates.
///
/// Uses the rational closed form when all perturbation coefficients vanish,
/// otherwise the generic stepper on [`canard_field`].
pub fn canard_kahan_map(params: &CanardParams, s: PlanarState) -> Result<PlanarState> {
    if params.a.is_zero() {
        kahan_closed_form(s, params.epsilon, params.lambda, params.h)
    } else {
        generic_kahan(&canard_field(params.epsilon, params.lambda, &params.a), s, params.h)
    }
}

pub fn canard_euler_map(params: &CanardParams, s: PlanarState) -> PlanarState {
    let CanardParams { epsilon: e, lambda, h, a } = *params;
    let PlanarState { x, y } = s;
    PlanarState::new(
        x + h * (x * x - y * (1.0 + a.a2 * x) + e * a.a1 * x),
        y + e * h * (x * (1.0 + a.a4 * x) - lambda + a.a5 * y),
    )
}

/// One iterate of the Kahan discretization of the chart-K2 field.
pub fn k2_kahan_map(h: f64, lambda2: f64, r2: f64, a: &Coefficients, s: PlanarState) -> Result<PlanarState> {
    if a.is_zero() || r2 == 0.0 {
        kahan_closed_form(s, 1.0, lambda2, h)
    } else {
        generic_kahan(&k2_field(lambda2, r2, a), s, h)
    }
}

/// Printed closed form of the chart-K2 Kahan map for `a = (1, 0, 0, 0)`.
pub fn k2_kahan_map_a1(h: f64, lambda: f64, r: f64, s: PlanarState) -> Result<PlanarState> {
    let PlanarState { x, y } = s;
    let h2 = h * h;
    let den = 1.0 - h * x - 0.5 * h * r + 0.25 * h2;
    if den.abs() < PIVOT_TOLERANCE * 1.0_f64.max((h * x).abs()) {
        return Err(CanardError::SingularStep { state: vec![x, y], h });
    }
    let xn = x - h * y + 0.5 * h * x * r - 0.25 * h2 * x + 0.5 * h2 * lambda;
    let yn = y - h * y * x - 0.5 * h * y * r - 0.5 * h2 * x * x - h * lambda + h2 * x * lambda + h * x
        + 0.5 * h2 * lambda * r
        - 0.25 * h2 * y;
    Ok(PlanarState::new(xn / den, yn / den))
}

pub fn k2_euler_map(h: f64, lambda2: f64, r2: f64, a: &Coefficients, s: PlanarState) -> PlanarState {
    let PlanarState { x, y } = s;
    PlanarState::new(
        x + h * (x * x - y + r2 * (a.a1 * x - a.a2 * x * y)),
        y + h * (x - lambda2 + r2 * (a.a4 * x * x + a.a5 * y)),
    )
}

/// A named planar map together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanarMap {
    Kahan(CanardParams),
    Euler(CanardParams),
    K2Kahan(K2Params),
    K2Euler(K2Params),
}

impl PlanarMap {
    pub fn id(&self) -> &'static str {
        match self {
            PlanarMap::Kahan(_) => "kahan",
            PlanarMap::Euler(_) => "euler",
            PlanarMap::K2Kahan(_) => "k2-kahan",
            PlanarMap::K2Euler(_) => "k2-euler",
        }
    }

    pub fn h(&self) -> f64 {
        match self {
            PlanarMap::Kahan(p) | PlanarMap::Euler(p) => p.h,
            PlanarMap::K2Kahan(p) | PlanarMap::K2Euler(p) => p.h,
        }
    }

    pub fn is_invertible(&self) -> bool {
        matches!(self, PlanarMap::Kahan(_) | PlanarMap::K2Kahan(_))
    }

    pub fn field(&self) -> QuadraticVectorField {
        match self {
            PlanarMap::Kahan(p) | PlanarMap::Euler(p) => canard_field(p.epsilon, p.lambda, &p.a),
            PlanarMap::K2Kahan(p) | PlanarMap::K2Euler(p) => k2_field(p.lambda2, p.r2, &p.a),
        }
    }

    pub fn step(&self, s: PlanarState) -> Result<PlanarState> {
        match self {
            PlanarMap::Kahan(p) => canard_kahan_map(p, s),
            PlanarMap::Euler(p) => Ok(canard_euler_map(p, s)),
            PlanarMap::K2Kahan(p) => k2_kahan_map(p.h, p.lambda2, p.r2, &p.a, s),
            PlanarMap::K2Euler(p) => Ok(k2_euler_map(p.h, p.lambda2, p.r2, &p.a, s)),
        }
    }

    /// Birational inverse; refused for the Euler maps.
    pub fn inverse_step(&self, s: PlanarState) -> Result<PlanarState> {
        match self {
            PlanarMap::Kahan(p) => canard_kahan_map(&CanardParams { h: -p.h, ..*p }, s),
            PlanarMap::K2Kahan(p) => k2_kahan_map(-p.h, p.lambda2, p.r2, &p.a, s),
            PlanarMap::Euler(_) | PlanarMap::K2Euler(_) => Err(CanardError::Unsupported(
                "the Euler map is not invertible; backward iteration is refused".into(),
            )),
        }
    }

    /// `det(Id - (h/2) Df(s))` for the forward (or inverse) Kahan step; `None` for Euler.
    pub fn denominator(&self, s: PlanarState, forward: bool) -> Option<f64> {
        if !self.is_invertible() {
            return None;
        }
        let h = if forward { self.h() } else { -self.h() };
        Some(kahan_denominator(&self.field(), &s.to_array(), h))
    }

    /// Euler step through the generic stepper (used to cross-check the explicit formulas).
    pub fn generic_step(&self, s: PlanarState) -> Result<PlanarState> {
        let vf = self.field();
        match self {
            PlanarMap::Kahan(_) | PlanarMap::K2Kahan(_) => generic_kahan(&vf, s, self.h()),
            PlanarMap::Euler(_) | PlanarMap::K2Euler(_) => {
                Ok(PlanarState::from_slice(&euler_step(&vf, &s.to_array(), self.h())))
            }
        }
    }
}

impl fmt::Display for PlanarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanarMap::Kahan(p) | PlanarMap::Euler(p) => write!(
                f,
                "map={} h={} epsilon={} lambda={} a1={} a2={} a4={} a5={}",
                self.id(),
                p.h,
                p.epsilon,
                p.lambda,
                p.a.a1,
                p.a.a2,
                p.a.a4,
                p.a.a5
            ),
            PlanarMap::K2Kahan(p) | PlanarMap::K2Euler(p) => write!(
                f,
                "map={} h={} lambda={} r={} a1={} a2={} a4={} a5={}",
                self.id(),
                p.h,
                p.lambda2,
                p.r2,
                p.a.a1,
                p.a.a2,
                p.a.a4,
                p.a.a5
            ),
        }
    }
}
