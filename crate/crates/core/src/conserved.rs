//! First integral of the rescaled fold, the invariant parabola `S_h` of `P⁰`,
//! and the formal conserved quantity of `P⁰` derived by exact coefficient
//! matching.
//!
//! Every exact object here carries an implicit `e^{-2y}` weight: a
//! polynomial `p` stands for `p(x, y) e^{-2y}`.

use num::One;

use crate::algebra::{rat, solve_exact, AlgebraError, HSeries, Poly, Var, DEFAULT_MAX_DEGREE};
use crate::error::{CanardError, Result};
use crate::integrators::{p0, PlanarState, Trajectory};
use crate::melnikov::p0_jacobian;

/// `H(x, y) = ½ e^{-2y} (y - x² + ½)`.
pub fn first_integral(x: f64, y: f64) -> f64 {
    0.5 * (-2.0 * y).exp() * (y - x * x + 0.5)
}

/// Special solution on `S_h`: `(h n / 2, h² n² / 4 - ½ - h² / 8)`.
pub fn gamma_h(n: i64, h: f64) -> PlanarState {
    let t = h * n as f64;
    PlanarState::new(0.5 * t, 0.25 * t * t - 0.5 - 0.125 * h * h)
}

/// Solution on `S_h` through `(x0, ·)`. Its `y` coordinate is the parabola at `x0 + h n / 2`.
pub fn gamma_h_from(x0: f64, n: i64, h: f64) -> PlanarState {
    let x = x0 + 0.5 * h * n as f64;
    PlanarState::new(x, x * x - 0.5 - 0.125 * h * h)
}

/// `φ_h(x, y) = x² - y - ½ - h²/8`; zero exactly on `S_h`, positive below it.
pub fn phi_h(x: f64, y: f64, h: f64) -> f64 {
    x * x - y - 0.5 - 0.125 * h * h
}

/// `S_{h,ε}` in original coordinates: `x² - y - ε/2 - ε² h² / 8`, invariant
/// under the Kahan map with `λ = 0`, `a = 0`, which advances `x` by `h ε / 2`.
pub fn phi_h_eps(x: f64, y: f64, h: f64, epsilon: f64) -> f64 {
    x * x - y - 0.5 * epsilon - 0.125 * epsilon * epsilon * h * h
}

pub fn on_curve(x: f64, y: f64, h: f64, tol: f64) -> bool {
    phi_h(x, y, h).abs() <= tol
}

/// `(det DP⁰(z), φ_h(P⁰ z) / φ_h(z))`; the two agree since `dx dy / φ_h` is invariant.
pub fn p0_det_ratio_check(x: f64, y: f64, h: f64) -> Result<(f64, f64)> {
    let phi = phi_h(x, y, h);
    if phi.abs() < 1e-14 {
        return Err(CanardError::SingularDensity { x, y });
    }
    let j = p0_jacobian(x, y, h)?;
    let z = p0(PlanarState::new(x, y), h)?;
    Ok((crate::linalg::mat2_det(&j), phi_h(z.x, z.y, h) / phi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeClass {
    Contracting,
    /// `x = 0`, where the quotient equals one.
    Unit,
    Expanding,
    /// `x = (1 + h²/4) / h`: common root of `f_h` and `g_h`, a pole of `P⁰`.
    Pole,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeReport {
    pub x: f64,
    pub h: f64,
    pub f_h: f64,
    pub g_h: f64,
    /// `|f_h / g_h|`, NaN at the pole.
    pub value: f64,
    pub class: DerivativeClass,
}

/// `|∂x̃/∂x|` on `S_h` via the quotient `f_h / g_h`.
pub fn derivative_classification(x: f64, h: f64) -> DerivativeReport {
    let c = 1.0 + 0.25 * h * h;
    let f_h = c * c - h * h * x * x;
    let g_h = h * h * x * x - x * (2.0 * h + 0.5 * h * h * h) + c * c;
    let x_star = c / h;
    let at_pole = ((x - x_star) / x_star).abs() < 1e-12;
    let value = if at_pole { f64::NAN } else { (f_h / g_h).abs() };
    let class = if at_pole {
        DerivativeClass::Pole
    } else if x == 0.0 {
        DerivativeClass::Unit
    } else if x < 0.0 {
        DerivativeClass::Contracting
    } else {
        DerivativeClass::Expanding
    };
    DerivativeReport { x, h, f_h, g_h, value, class }
}

/// A polynomial standing for `poly(x, y) e^{-2y}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpWeightedPoly {
    pub poly: Poly,
}

impl ExpWeightedPoly {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (-2.0 * y).exp() * self.poly.eval_f64(x, y)
    }
}

/// `H + Σ_i h^{2i} H̄_{2i}` truncated at `h^order`; `corrections[k]` multiplies `h^{2(k+1)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalConservedQuantity {
    pub order: usize,
    pub corrections: Vec<ExpWeightedPoly>,
}

impl FormalConservedQuantity {
    /// Just `H`.
    pub fn leading() -> Self {
        Self { order: 0, corrections: Vec::new() }
    }

    /// Keep corrections up to `h^order` (order rounded down to even).
    pub fn truncated(&self, order: usize) -> Self {
        let k = (order / 2).min(self.corrections.len());
        Self { order: 2 * k, corrections: self.corrections[..k].to_vec() }
    }

    /// All polynomial parts `p_0, p_1, …` with `p_0` the bracket of `H`.
    pub fn polynomials(&self) -> Vec<Poly> {
        std::iter::once(h_bracket())
            .chain(self.corrections.iter().map(|c| c.poly.clone()))
            .collect()
    }
}

/// `½ (y - x² + ½)`, the polynomial part of `H`.
pub fn h_bracket() -> Poly {
    Poly::from_terms([((0, 0), rat(1, 4)), ((0, 1), rat(1, 2)), ((2, 0), rat(-1, 2))])
}

/// `G₃` polynomial part `(1/6) x (x² + x⁴ - 4x²y + 3y²)`.
pub fn g3_printed() -> Poly {
    Poly::from_terms([
        ((3, 0), rat(1, 6)),
        ((5, 0), rat(1, 6)),
        ((3, 1), rat(-2, 3)),
        ((1, 2), rat(1, 2)),
    ])
}

/// `H̄₂ = (1/6)(½ + y(1 + y - y²) - x²(x²/2 + y - y²))`.
pub fn hbar2_printed() -> Poly {
    Poly::from_terms([
        ((0, 0), rat(1, 12)),
        ((0, 1), rat(1, 6)),
        ((0, 2), rat(1, 6)),
        ((0, 3), rat(-1, 6)),
        ((4, 0), rat(-1, 12)),
        ((2, 1), rat(-1, 6)),
        ((2, 2), rat(1, 6)),
    ])
}

/// Weighted transport `L p = (x² - y) ∂x p + x (∂y p - 2 p)`, so that
/// `d/dt (p e^{-2y}) = (L p) e^{-2y}` along `x' = x² - y, y' = x`.
pub fn transport(p: &Poly) -> Poly {
    let drift = &(&Poly::x() * &Poly::x()) - &Poly::y();
    let a = &drift * &p.partial(Var::X);
    let b = &Poly::x() * &(&p.partial(Var::Y) - &p.scale(&rat(2, 1)));
    &a + &b
}

/// Series of `P⁰(x, y)` in `h`, truncated at `order`.
fn step_series(order: usize, max_degree: u32) -> std::result::Result<(HSeries, HSeries), AlgebraError> {
    let den = HSeries::from_coeffs(vec![Poly::one(), -&Poly::x(), Poly::constant(rat(1, 4))], order)
        .with_max_degree(max_degree);
    let inv = den.inverse()?;
    let x = Poly::x();
    let y = Poly::y();
    let num_x = HSeries::from_coeffs(vec![x.clone(), -&y, x.scale(&rat(-1, 4))], order)
        .with_max_degree(max_degree);
    let num_y = HSeries::from_coeffs(
        vec![
            y.clone(),
            &x - &(&x * &y),
            &(&x * &x).scale(&rat(-1, 2)) - &y.scale(&rat(1, 4)),
        ],
        order,
    )
    .with_max_degree(max_degree);
    Ok((num_x.mul(&inv)?, num_y.mul(&inv)?))
}

/// `Σ_j h^{2j} [p_j(P⁰ z) e^{-2(ỹ - y)} - p_j(z)]`, the step defect of the weighted sum.
pub fn step_defect(polys: &[Poly], order: usize, max_degree: u32) -> std::result::Result<HSeries, AlgebraError> {
    let (sx, sy) = step_series(order, max_degree)?;
    let dy = sy.sub(&HSeries::constant(Poly::y(), order).with_max_degree(max_degree))?;
    let weight = dy.scale(&rat(-2, 1)).exp()?;
    let mut total = HSeries::zero(order).with_max_degree(max_degree);
    for (j, p) in polys.iter().enumerate() {
        if 2 * j > order {
            break;
        }
        let moved = HSeries::compose(p, &sx, &sy)?.mul(&weight)?;
        let diff = moved.sub(&HSeries::constant(p.clone(), order).with_max_degree(max_degree))?;
        let shifted = HSeries::term(Poly::one(), 2 * j, order)
            .with_max_degree(max_degree)
            .mul(&diff)?;
        total = total.add(&shifted)?;
    }
    Ok(total)
}

/// Series of `e^{2y} H(P⁰(x, y))` in `h` through `h^order`.
pub fn expand_h_of_step(order: usize) -> Result<HSeries> {
    expand_h_of_step_with(order, DEFAULT_MAX_DEGREE)
}

pub fn expand_h_of_step_with(order: usize, max_degree: u32) -> Result<HSeries> {
    if order < 3 {
        return Err(CanardError::InvalidParameter(format!("expansion order must be >= 3, got {order}")));
    }
    let defect = step_defect(&[h_bracket()], order, max_degree)?;
    Ok(defect.add(&HSeries::constant(h_bracket(), order).with_max_degree(max_degree))?)
}

fn ansatz_monomials(degree: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for i in 0..=degree {
        for j in 0..=(degree - i) {
            out.push((i, j));
        }
    }
    out
}

/// Solve `L p = -d` over polynomials of total degree at most `degree`.
fn solve_transport(d: &Poly, degree: u32) -> std::result::Result<Poly, AlgebraError> {
    let basis = ansatz_monomials(degree);
    let images: Vec<Poly> = basis
        .iter()
        .map(|&(i, j)| transport(&Poly::monomial(One::one(), i, j)))
        .collect();
    let mut rows: Vec<(u32, u32)> = images
        .iter()
        .flat_map(|p| p.terms().map(|(k, _)| *k))
        .chain(d.terms().map(|(k, _)| *k))
        .collect();
    rows.sort_unstable();
    rows.dedup();
    let a: Vec<Vec<_>> = rows
        .iter()
        .map(|&(i, j)| images.iter().map(|p| p.coeff(i, j)).collect())
        .collect();
    let b: Vec<_> = rows.iter().map(|&(i, j)| -d.coeff(i, j)).collect();
    let sol = solve_exact(&a, &b)?;
    Ok(Poly::from_terms(basis.into_iter().zip(sol.values)))
}

/// Polynomial part of `H̄_{2i}` given all lower corrections.
///
/// The coefficient of `h^{2i+1}` in the step defect must cancel against
/// `L p`. The ansatz has degree `2(i+1)` and is widened by two once if the
/// system is inconsistent. The kernel direction `y - x² + ½` is fixed by
/// row reduction with monomials ordered by `(i, j)` and free unknowns set to
/// zero, which leaves no `x²` term in the kernel-affected part.
pub fn solve_correction(i: usize, previous: &FormalConservedQuantity) -> Result<ExpWeightedPoly> {
    solve_correction_with(i, previous, DEFAULT_MAX_DEGREE)
}

pub fn solve_correction_with(i: usize, previous: &FormalConservedQuantity, max_degree: u32) -> Result<ExpWeightedPoly> {
    if i == 0 {
        return Err(CanardError::InvalidParameter("correction index starts at 1".into()));
    }
    if previous.corrections.len() < i - 1 {
        return Err(CanardError::InvalidParameter(format!(
            "order {} correction needs {} previous corrections, got {}",
            2 * i,
            i - 1,
            previous.corrections.len()
        )));
    }
    let order = 2 * i + 1;
    let polys: Vec<Poly> = previous.truncated(2 * (i - 1)).polynomials();
    let defect = step_defect(&polys, order, max_degree)?;
    for k in 0..order {
        if !defect.coeff(k).is_zero() {
            return Err(AlgebraError::DerivationFailure {
                order: 2 * i,
                reason: format!("lower-order defect at h^{k} does not vanish"),
            }
            .into());
        }
    }
    let d = defect.coeff(order);
    let base = 2 * (i as u32 + 1);
    let poly = match solve_transport(d, base) {
        Ok(p) => p,
        Err(AlgebraError::Inconsistent { .. }) => solve_transport(d, base + 2).map_err(|e| {
            AlgebraError::DerivationFailure { order: 2 * i, reason: e.to_string() }
        })?,
        Err(e) => return Err(e.into()),
    };
    Ok(ExpWeightedPoly { poly })
}

/// Derive `H̄` up to `h^order` (`order` even).
pub fn derive(order: usize) -> Result<FormalConservedQuantity> {
    derive_with(order, DEFAULT_MAX_DEGREE)
}

pub fn derive_with(order: usize, max_degree: u32) -> Result<FormalConservedQuantity> {
    if order % 2 != 0 {
        return Err(CanardError::InvalidParameter(format!("order must be even, got {order}")));
    }
    let mut fcq = FormalConservedQuantity::leading();
    for i in 1..=order / 2 {
        let c = solve_correction_with(i, &fcq, max_degree)?;
        fcq.corrections.push(c);
        fcq.order = 2 * i;
    }
    Ok(fcq)
}

/// Coefficients of `h^0 … h^order` of the corrected step defect; all odd ones
/// up to `2k+1` vanish once `k` corrections are in place.
pub fn corrected_defect(fcq: &FormalConservedQuantity, order: usize, max_degree: u32) -> Result<HSeries> {
    Ok(step_defect(&fcq.polynomials(), order, max_degree)?)
}

/// `H(x, y) + Σ h^{2i} e^{-2y} H̄_{2i}(x, y)`.
pub fn hbar_eval(x: f64, y: f64, h: f64, fcq: &FormalConservedQuantity) -> f64 {
    let w = (-2.0 * y).exp();
    let mut acc = 0.0;
    let mut hp = 1.0;
    for c in &fcq.corrections {
        hp *= h * h;
        acc += hp * c.poly.eval_f64(x, y);
    }
    first_integral(x, y) + w * acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    /// `(n, H, H̄)` per state.
    pub rows: Vec<(i64, f64, f64)>,
    pub ptp_h: f64,
    pub ptp_hbar: f64,
}

fn ptp(v: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

/// Per-index `H` and `H̄` along a trajectory, using the trajectory's step size.
pub fn conservation_monitor(traj: &Trajectory, fcq: &FormalConservedQuantity) -> MonitorReport {
    let h = traj.map.h();
    let rows: Vec<(i64, f64, f64)> = traj
        .indexed()
        .map(|(n, s)| (n, first_integral(s.x, s.y), hbar_eval(s.x, s.y, h, fcq)))
        .collect();
    MonitorReport {
        ptp_h: ptp(rows.iter().map(|r| r.1)),
        ptp_hbar: ptp(rows.iter().map(|r| r.2)),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::{iterate, K2Params, PlanarMap};

    #[test]
    fn first_integral_values() {
        assert_eq!(first_integral(0.0, -0.5), 0.0);
        assert_eq!(first_integral(0.0, 0.0), 0.25);
        for t in [-2.0, 0.0, 3.0] {
            assert!(first_integral(t / 2.0, t * t / 4.0 - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma_h_values() {
        assert_eq!(gamma_h(0, 0.2), PlanarState::new(0.0, -0.5 - 0.005));
        let g = gamma_h(1, 0.1);
        assert!((g.x - 0.05).abs() < 1e-16 && (g.y + 0.49875).abs() < 1e-15);
        let g = gamma_h_from(0.3, 4, 0.1);
        assert!(phi_h(g.x, g.y, 0.1).abs() < 1e-15 && (g.x - 0.5).abs() < 1e-15);
    }

    #[test]
    fn original_coordinates_invariant_curve() {
        use crate::integrators::{canard_kahan_map, CanardParams, Coefficients};
        for &(eps, h) in &[(0.01, 0.1), (0.1, 0.5), (0.3, 0.05)] {
            let p = CanardParams::new(eps, 0.0, h, Coefficients::default()).unwrap();
            let mut s = PlanarState::new(-0.5, 0.0);
            s.y = s.x * s.x - 0.5 * eps - 0.125 * eps * eps * h * h;
            // the curve attracts for x < 0; beyond that rounding errors grow
            while s.x < 0.0 {
                let t = canard_kahan_map(&p, s).unwrap();
                assert!((t.x - s.x - 0.5 * h * eps).abs() < 1e-13);
                assert!(phi_h_eps(t.x, t.y, h, eps).abs() < 1e-12);
                s = t;
            }
        }
    }

    #[test]
    fn p0_advances_gamma_h() {
        // x stays below 3/4 of the pole c/h ≈ 20
        let h = 0.05;
        for n in -600..600 {
            let next = p0(gamma_h(n, h), h).unwrap();
            let want = gamma_h(n + 1, h);
            let scale = 1.0_f64.max(want.y.abs());
            assert!((next.x - want.x).abs() < 1e-13 * scale);
            assert!((next.y - want.y).abs() < 1e-13 * scale);
        }
    }

    #[test]
    fn phi_sign_convention() {
        assert_eq!(phi_h(0.0, 0.0, 0.0), -0.5);
        let h = 0.3;
        assert!((phi_h(0.0, -1.0, h) - (0.5 - h * h / 8.0)).abs() < 1e-16);
        assert!(on_curve(0.0, -0.5 - h * h / 8.0, h, 1e-15));
    }

    #[test]
    fn density_transport() {
        let (d, r) = p0_det_ratio_check(0.0, 0.0, 0.4).unwrap();
        assert!((d - 1.0).abs() < 1e-15 && (r - 1.0).abs() < 1e-15);
        let (d, r) = p0_det_ratio_check(0.3, 0.1, 0.1).unwrap();
        assert!(((d - r) / r).abs() < 1e-10);
        let g = gamma_h(3, 0.1);
        assert!(matches!(
            p0_det_ratio_check(g.x, g.y, 0.1),
            Err(CanardError::SingularDensity { .. })
        ));
    }

    #[test]
    fn classification_trichotomy() {
        let h = 0.1;
        let left = derivative_classification(-1.0, h);
        assert_eq!(left.class, DerivativeClass::Contracting);
        assert!(left.value < 1.0);
        let mid = derivative_classification(0.0, h);
        assert_eq!(mid.class, DerivativeClass::Unit);
        assert!((mid.value - 1.0).abs() < 1e-15);
        let right = derivative_classification(1.0, h);
        assert_eq!(right.class, DerivativeClass::Expanding);
        assert!(right.value > 1.0);
        let x_star = (1.0 + h * h / 4.0) / h;
        let pole = derivative_classification(x_star, h);
        assert_eq!(pole.class, DerivativeClass::Pole);
        assert!(pole.f_h.abs() < 1e-12 && pole.g_h.abs() < 1e-12);
        assert_eq!(derivative_classification(2.0 * x_star, h).class, DerivativeClass::Expanding);
        assert!(derivative_classification(2.0 * x_star, h).value > 1.0);
    }

    #[test]
    fn classification_quotient_matches_jacobian_on_curve() {
        let h = 0.2;
        for &x in &[-1.5, -0.2, 0.0, 0.7, 3.0] {
            let y = x * x - 0.5 - h * h / 8.0;
            let j = p0_jacobian(x, y, h).unwrap();
            let r = derivative_classification(x, h);
            assert!((j[0][0].abs() - r.value).abs() < 1e-12);
        }
    }

    #[test]
    fn series_low_orders() {
        let s = expand_h_of_step(3).unwrap();
        assert_eq!(s.coeff(0), &h_bracket());
        assert!(s.coeff(1).is_zero());
        assert!(s.coeff(2).is_zero());
        assert_eq!(s.coeff(3), &g3_printed());
        assert!(expand_h_of_step(2).is_err());
    }

    #[test]
    fn transport_kernel() {
        let k = Poly::from_terms([((0, 0), rat(1, 2)), ((0, 1), rat(1, 1)), ((2, 0), rat(-1, 1))]);
        assert!(transport(&k).is_zero());
        assert!(transport(&h_bracket()).is_zero());
    }

    #[test]
    fn first_correction_matches_printed() {
        let c = solve_correction(1, &FormalConservedQuantity::leading()).unwrap();
        assert_eq!(c.poly, hbar2_printed());
        assert_eq!(c.poly.eval(&rat(0, 1), &rat(0, 1)), rat(1, 12));
    }

    #[test]
    fn odd_coefficients_cancel_after_corrections() {
        let fcq = derive(4).unwrap();
        assert!(fcq.corrections[1].poly.degree().unwrap() <= 8);
        let s = corrected_defect(&fcq, 5, DEFAULT_MAX_DEGREE).unwrap();
        for k in 0..=5 {
            assert!(s.coeff(k).is_zero(), "h^{k} coefficient is {}", s.coeff(k));
        }
    }

    #[test]
    fn higher_order_needs_larger_degree_budget() {
        assert!(matches!(
            derive(6),
            Err(CanardError::Algebra(AlgebraError::DegreeOverflow { .. }))
        ));
        assert!(derive(3).is_err());
        assert!(solve_correction(2, &FormalConservedQuantity::leading()).is_err());
    }

    #[test]
    fn hbar_eval_reduces_to_h() {
        let fcq = derive(2).unwrap();
        assert_eq!(hbar_eval(0.3, -0.2, 0.1, &FormalConservedQuantity::leading()), first_integral(0.3, -0.2));
        assert_eq!(hbar_eval(0.0, -0.4, 0.0, &fcq), first_integral(0.0, -0.4));
    }

    #[test]
    fn monitor_constant_trajectory() {
        let map = PlanarMap::K2Kahan(K2Params::unperturbed(0.01).unwrap());
        let t = iterate(&map, PlanarState::default(), 0, 20).unwrap();
        let r = conservation_monitor(&t, &derive(2).unwrap());
        assert_eq!(r.rows.len(), 21);
        assert_eq!(r.ptp_h, 0.0);
        assert_eq!(r.ptp_hbar, 0.0);
    }

    #[test]
    fn hbar_far_flatter_than_h_on_periodic_orbit() {
        let map = PlanarMap::K2Kahan(K2Params::unperturbed(0.01).unwrap());
        let t = iterate(&map, PlanarState::new(0.0, -0.4), 0, 10_000).unwrap();
        let r = conservation_monitor(&t, &derive(2).unwrap());
        assert!(r.ptp_hbar < 1e-3 * r.ptp_h);
    }
}
