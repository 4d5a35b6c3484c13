use num::One;

use super::{AlgebraError, Poly, Rational, DEFAULT_MAX_DEGREE};

/// Truncated power series in `h` whose coefficients are bivariate polynomials.
///
/// Entry `k` of the coefficient list multiplies `h^k`. The list always has
/// `truncation_order + 1` entries; anything beyond is dropped by every
/// operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HSeries {
    coeffs: Vec<Poly>,
    max_degree: u32,
}

impl HSeries {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![Poly::zero(); order + 1],
            max_degree: DEFAULT_MAX_DEGREE,
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Poly::one(), order)
    }

    /// `p * h^0`.
    pub fn constant(p: Poly, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = p;
        s
    }

    /// `p * h^k` (zero if `k` exceeds the truncation order).
    pub fn term(p: Poly, k: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = p;
        }
        s
    }

    /// Builds a series from leading coefficients; missing ones are zero and extra ones are dropped.
    pub fn from_coeffs(coeffs: Vec<Poly>, order: usize) -> Self {
        let mut s = Self::zero(order);
        for (k, c) in coeffs.into_iter().enumerate().take(order + 1) {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn with_max_degree(mut self, max_degree: u32) -> Self {
        self.max_degree = max_degree;
        self
    }

    pub fn truncation_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn coeff(&self, k: usize) -> &Poly {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }

    fn same_order(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.truncation_order() != other.truncation_order() {
            return Err(AlgebraError::OrderMismatch {
                left: self.truncation_order(),
                right: other.truncation_order(),
            });
        }
        Ok(())
    }

    fn checked(self) -> Result<Self, AlgebraError> {
        for c in &self.coeffs {
            c.check_degree(self.max_degree)?;
        }
        Ok(self)
    }

    fn limit(&self, other: &Self) -> u32 {
        self.max_degree.min(other.max_degree)
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.same_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Self { coeffs, max_degree: self.limit(other) }.checked()
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.same_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Self { coeffs, max_degree: self.limit(other) }.checked()
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            max_degree: self.max_degree,
        }
    }

    /// Multiply every coefficient by the polynomial `p`.
    pub fn scale_poly(&self, p: &Poly) -> Result<Self, AlgebraError> {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * p).collect(),
            max_degree: self.max_degree,
        }
        .checked()
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.scale(r)).collect(),
            max_degree: self.max_degree,
        }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.same_order(other)?;
        let n = self.truncation_order();
        let mut coeffs = vec![Poly::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                if !b.is_zero() {
                    coeffs[i + j] = &coeffs[i + j] + &(a * b);
                }
            }
        }
        Self { coeffs, max_degree: self.limit(other) }.checked()
    }

    /// Multiplicative inverse; the `h^0` coefficient must be a nonzero constant.
    pub fn inverse(&self) -> Result<Self, AlgebraError> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(AlgebraError::NotInvertible("h^0 coefficient is zero".into()));
        }
        if a0.degree() != Some(0) {
            return Err(AlgebraError::NotInvertible(format!(
                "h^0 coefficient {a0} is not constant"
            )));
        }
        let inv0 = a0.coeff(0, 0).recip();
        let n = self.truncation_order();
        let mut b = vec![Poly::zero(); n + 1];
        b[0] = Poly::constant(inv0.clone());
        for k in 1..=n {
            let mut acc = Poly::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() && !b[k - j].is_zero() {
                    acc = &acc + &(&self.coeffs[j] * &b[k - j]);
                }
            }
            b[k] = acc.scale(&-inv0.clone());
            b[k].check_degree(self.max_degree)?;
        }
        Ok(Self { coeffs: b, max_degree: self.max_degree })
    }

    /// Exponential of a series with vanishing `h^0` coefficient, via `k e_k = Σ j a_j e_{k-j}`.
    pub fn exp(&self) -> Result<Self, AlgebraError> {
        if !self.coeffs[0].is_zero() {
            return Err(AlgebraError::Precondition(
                "exp requires a zero h^0 coefficient".into(),
            ));
        }
        let n = self.truncation_order();
        let mut e = vec![Poly::zero(); n + 1];
        e[0] = Poly::one();
        for k in 1..=n {
            let mut acc = Poly::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() && !e[k - j].is_zero() {
                    let w = Rational::from_integer((j as i64).into());
                    acc = &acc + &(&self.coeffs[j] * &e[k - j]).scale(&w);
                }
            }
            e[k] = acc.scale(&Rational::new(One::one(), (k as i64).into()));
            e[k].check_degree(self.max_degree)?;
        }
        Ok(Self { coeffs: e, max_degree: self.max_degree })
    }

    /// Substitute `x -> sx`, `y -> sy` into `p`, producing a series.
    pub fn compose(p: &Poly, sx: &Self, sy: &Self) -> Result<Self, AlgebraError> {
        sx.same_order(sy)?;
        let order = sx.truncation_order();
        let max_i = p.terms().map(|(&(i, _), _)| i).max().unwrap_or(0);
        let max_j = p.terms().map(|(&(_, j), _)| j).max().unwrap_or(0);
        let mut xp = vec![Self::one(order).with_max_degree(sx.max_degree)];
        for _ in 0..max_i {
            let next = xp.last().expect("nonempty").mul(sx)?;
            xp.push(next);
        }
        let mut yp = vec![Self::one(order).with_max_degree(sy.max_degree)];
        for _ in 0..max_j {
            let next = yp.last().expect("nonempty").mul(sy)?;
            yp.push(next);
        }
        let mut out = Self::zero(order).with_max_degree(sx.limit(sy));
        for (&(i, j), c) in p.terms() {
            let t = xp[i as usize].mul(&yp[j as usize])?.scale(c);
            out = out.add(&t)?;
        }
        Ok(out)
    }

    /// Evaluate at numeric `(x, y, h)`.
    pub fn eval_f64(&self, x: f64, y: f64, h: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * h + c.eval_f64(x, y))
    }
}

impl Default for HSeries {
    fn default() -> Self {
        Self::zero(super::DEFAULT_TRUNCATION)
    }
}
