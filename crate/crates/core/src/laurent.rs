//! Exact Laurent polynomials in the approximation parameter `l` (λ).
//!
//! Approximate bilinear algorithms carry coefficients such as `λ` and `λ^-1`.
//! Validation must see those cancel exactly, so coefficients are arbitrary
//! precision rationals and degrees may be negative.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A finite sum `Σ c_k λ^k` with rational `c_k` and `k ∈ ℤ`.
///
/// No stored coefficient is zero; the empty map is the zero element.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Laurent {
    terms: BTreeMap<i32, BigRational>,
}

impl Laurent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(c)))
    }

    /// `c · λ^degree`.
    pub fn monomial(c: BigRational, degree: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(degree, c);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `λ^degree` (zero if absent).
    pub fn coeff(&self, degree: i32) -> BigRational {
        self.terms.get(&degree).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    /// True when the value does not depend on λ.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&k| k == 0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &BigRational)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    fn add_term(&mut self, degree: i32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(degree).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&degree);
        }
    }

    /// Substitutes a concrete rational λ. Rejects λ = 0 when a negative
    /// degree is present.
    pub fn evaluate(&self, lambda: &BigRational) -> Result<BigRational> {
        if lambda.is_zero() {
            if self.min_degree().is_some_and(|k| k < 0) {
                return Err(Error::LambdaZero);
            }
            return Ok(self.coeff(0));
        }
        let mut acc = BigRational::zero();
        for (&k, c) in &self.terms {
            let pow = if k >= 0 {
                num_traits::pow(lambda.clone(), k as usize)
            } else {
                num_traits::pow(lambda.recip(), (-k) as usize)
            };
            acc += c * pow;
        }
        Ok(acc)
    }

    /// The constant term, valid only when the value is λ-free.
    pub fn as_constant(&self) -> Option<BigRational> {
        self.is_constant().then(|| self.coeff(0))
    }
}

impl From<i64> for Laurent {
    fn from(c: i64) -> Self {
        Laurent::from_int(c)
    }
}

impl Add for &Laurent {
    type Output = Laurent;
    fn add(self, rhs: &Laurent) -> Laurent {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Laurent {
    type Output = Laurent;
    fn add(mut self, rhs: Laurent) -> Laurent {
        self += &rhs;
        self
    }
}

impl AddAssign<&Laurent> for Laurent {
    fn add_assign(&mut self, rhs: &Laurent) {
        for (&k, c) in &rhs.terms {
            self.add_term(k, c.clone());
        }
    }
}

impl Neg for &Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        Laurent {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}

impl Neg for Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        -&self
    }
}

impl Sub for &Laurent {
    type Output = Laurent;
    fn sub(self, rhs: &Laurent) -> Laurent {
        self + &(-rhs)
    }
}

impl Sub for Laurent {
    type Output = Laurent;
    fn sub(self, rhs: Laurent) -> Laurent {
        &self - &rhs
    }
}

impl Mul for &Laurent {
    type Output = Laurent;
    fn mul(self, rhs: &Laurent) -> Laurent {
        let mut out = Laurent::zero();
        for (&ka, ca) in &self.terms {
            for (&kb, cb) in &rhs.terms {
                out.add_term(ka + kb, ca * cb);
            }
        }
        out
    }
}

impl Mul for Laurent {
    type Output = Laurent;
    fn mul(self, rhs: Laurent) -> Laurent {
        &self * &rhs
    }
}

fn fmt_rational(c: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.denom().is_one() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

/// Canonical text form: terms in ascending degree joined by `+`, each
/// `num[/den][*l^k]`. Zero prints as `0`.
impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            fmt_rational(c, f)?;
            if *k != 0 {
                write!(f, "*l^{k}")?;
            }
        }
        Ok(())
    }
}

fn parse_rational(s: &str) -> std::result::Result<BigRational, String> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| format!("bad numerator `{num}`"))?;
    let den = BigInt::from_str(den).map_err(|_| format!("bad denominator `{den}`"))?;
    if den.is_zero() {
        return Err("zero denominator".into());
    }
    if den.is_negative() {
        return Err("denominator must be positive".into());
    }
    Ok(BigRational::new(num, den))
}

fn parse_term(s: &str) -> std::result::Result<(BigRational, i32), String> {
    match s.split_once('*') {
        None => Ok((parse_rational(s)?, 0)),
        Some((c, pow)) => {
            let k = pow
                .strip_prefix("l^")
                .ok_or_else(|| format!("expected `l^k` after `*`, got `{pow}`"))?;
            let k = k.parse::<i32>().map_err(|_| format!("bad exponent `{k}`"))?;
            Ok((parse_rational(c)?, k))
        }
    }
}

impl FromStr for Laurent {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err("empty coefficient".into());
        }
        let mut out = Laurent::zero();
        // A '+' separates terms; a leading '-' belongs to the numerator.
        for term in s.split('+') {
            let (c, k) = parse_term(term)?;
            out.add_term(k, c);
        }
        Ok(out)
    }
}
