use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num::{One, Signed, ToPrimitive, Zero};

use super::{AlgebraError, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

/// Polynomial in `x, y` with exact rational coefficients.
///
/// Terms are keyed by the exponent pair `(i, j)` of `x^i y^j`. Zero
/// coefficients are never stored, so structural equality is mathematical
/// equality.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn x() -> Self {
        Self::monomial(Rational::one(), 1, 0)
    }

    pub fn y() -> Self {
        Self::monomial(Rational::one(), 0, 1)
    }

    pub fn monomial(c: Rational, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), Rational)>,
    {
        let mut p = Self::zero();
        for ((i, j), c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    /// Accumulate `c * x^i y^j`, pruning the entry if it cancels.
    pub fn add_term(&mut self, i: u32, j: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((i, j)).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn partial(&self, var: Var) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            match var {
                Var::X if i > 0 => out.add_term(i - 1, j, c * Rational::from_integer(i.into())),
                Var::Y if j > 0 => out.add_term(i, j - 1, c * Rational::from_integer(j.into())),
                _ => {}
            }
        }
        out
    }

    pub fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for (&(i, j), c) in &self.terms {
            acc += c * num::pow(x.clone(), i as usize) * num::pow(y.clone(), j as usize);
        }
        acc
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| c.to_f64().unwrap_or(f64::NAN) * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    pub(crate) fn check_degree(&self, max: u32) -> Result<(), AlgebraError> {
        match self.degree() {
            Some(d) if d > max => Err(AlgebraError::DegreeOverflow { degree: d, max }),
            _ => Ok(()),
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &rhs.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical text form: `c * x^i * y^j` terms sorted by `(i, j)`, coefficients
/// as `num/den` (denominator omitted when 1), zero exponents omitted.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (&(i, j), c)) in self.terms.iter().enumerate() {
            let body = fmt_rational(&c.abs());
            match (k, c.is_negative()) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
            if i > 0 {
                write!(f, " * x^{i}")?;
            }
            if j > 0 {
                write!(f, " * y^{j}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Poly {
    type Err = AlgebraError;

    /// Parses the canonical form produced by `Display`. Bare `x`/`y` factors
    /// and a missing leading coefficient are also accepted.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(AlgebraError::Parse("empty input".into()));
        }
        let mut pieces = Vec::new();
        let mut start = 0;
        for (idx, ch) in compact.char_indices() {
            if (ch == '+' || ch == '-') && idx > start {
                pieces.push(&compact[start..idx]);
                start = idx;
            }
        }
        pieces.push(&compact[start..]);

        let mut out = Poly::zero();
        for piece in pieces {
            let (sign, body) = match piece.as_bytes().first() {
                Some(b'-') => (-1, &piece[1..]),
                Some(b'+') => (1, &piece[1..]),
                _ => (1, piece),
            };
            if body.is_empty() {
                return Err(AlgebraError::Parse(format!("dangling sign in {s:?}")));
            }
            let mut coeff = Rational::one();
            let (mut i, mut j) = (0u32, 0u32);
            for factor in body.split('*') {
                let (base, exp) = match factor.split_once('^') {
                    Some((b, e)) => (
                        b,
                        e.parse::<u32>()
                            .map_err(|_| AlgebraError::Parse(format!("bad exponent {e:?}")))?,
                    ),
                    None => (factor, 1),
                };
                match base {
                    "x" => i += exp,
                    "y" => j += exp,
                    num_text => {
                        let r = match num_text.split_once('/') {
                            Some((n, d)) => {
                                let n: num::BigInt = n
                                    .parse()
                                    .map_err(|_| AlgebraError::Parse(format!("bad numerator {n:?}")))?;
                                let d: num::BigInt = d
                                    .parse()
                                    .map_err(|_| AlgebraError::Parse(format!("bad denominator {d:?}")))?;
                                if d.is_zero() {
                                    return Err(AlgebraError::Parse("zero denominator".into()));
                                }
                                Rational::new(n, d)
                            }
                            None => Rational::from_integer(
                                num_text
                                    .parse()
                                    .map_err(|_| AlgebraError::Parse(format!("bad factor {num_text:?}")))?,
                            ),
                        };
                        coeff *= num::pow(r, exp as usize);
                    }
                }
            }
            if sign < 0 {
                coeff = -coeff;
            }
            out.add_term(i, j, coeff);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    #[test]
    fn monomial_product() {
        assert_eq!(&Poly::x() * &Poly::y(), Poly::monomial(rat(1, 1), 1, 1));
    }

    #[test]
    fn cancellation_prunes_terms() {
        let s = &p("x^2 - y") + &Poly::y();
        assert_eq!(s, p("x^2"));
        assert_eq!(s.len(), 1);
        assert!((&s - &s).is_zero());
    }

    #[test]
    fn square_of_binomial() {
        let a = p("1 + x");
        assert_eq!(&a * &a, p("1 + 2*x + x^2"));
    }

    #[test]
    fn partial_derivatives() {
        assert_eq!(p("x^2*y").partial(Var::X), p("2*x*y"));
        assert!(p("x^2").partial(Var::Y).is_zero());
        assert_eq!(p("y^3 - x^2*y").partial(Var::Y), p("3*y^2 - x^2"));
    }

    #[test]
    fn display_is_canonical_and_round_trips() {
        let q = p("-1/2*x^2 + 1/12 + 3*y - x*y^2");
        let text = q.to_string();
        assert_eq!(text, "1/12 + 3 * y^1 - 1 * x^1 * y^2 - 1/2 * x^2");
        assert_eq!(text.parse::<Poly>().unwrap(), q);
        assert_eq!(Poly::zero().to_string(), "0");
        assert_eq!("0".parse::<Poly>().unwrap(), Poly::zero());
    }

    #[test]
    fn rationals_stay_reduced() {
        let q = Poly::constant(rat(2, 4)).scale(&rat(-3, 6));
        assert_eq!(q.coeff(0, 0), rat(-1, 4));
        assert_eq!(q.to_string(), "-1/4");
    }

    #[test]
    fn degree_and_eval() {
        let q = p("1 + x^3*y - y^2");
        assert_eq!(q.degree(), Some(4));
        assert_eq!(Poly::zero().degree(), None);
        assert_eq!(q.eval(&rat(2, 1), &rat(1, 2)), rat(19, 4));
        assert!((q.eval_f64(2.0, 0.5) - 4.75).abs() < 1e-15);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("".parse::<Poly>().is_err());
        assert!("1/0".parse::<Poly>().is_err());
        assert!("2 * z".parse::<Poly>().is_err());
        assert!("x^a".parse::<Poly>().is_err());
    }
}
