//! Recursive execution of a bilinear algorithm on concrete matrices.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algorithm::BilinearAlgorithm;
use crate::error::{Error, Result};

/// Field used by the executor.
pub trait Scalar:
    Clone
    + PartialEq
    + std::fmt::Debug
    + Zero
    + One
    + for<'a> std::ops::AddAssign<&'a Self>
    + for<'a> std::ops::SubAssign<&'a Self>
    + for<'a> std::ops::Mul<&'a Self, Output = Self>
    + std::ops::Sub<Output = Self>
{
    fn from_rational(x: &BigRational) -> Self;
}

impl Scalar for BigRational {
    fn from_rational(x: &BigRational) -> Self {
        x.clone()
    }
}

impl Scalar for f64 {
    fn from_rational(x: &BigRational) -> Self {
        x.to_f64().unwrap_or(f64::NAN)
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let data = (0..rows * cols).map(|x| f(x / cols, x % cols)).collect();
        Self { rows, cols, data }
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    /// Triple-loop product.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut c = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.clone() * other.get(l, j);
                    c.data[i * other.cols + j] += &prod;
                }
            }
        }
        Ok(c)
    }

    fn block(&self, bi: usize, bj: usize, br: usize, bc: usize) -> Self {
        Self::from_fn(br, bc, |i, j| self.get(bi * br + i, bj * bc + j).clone())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ExecStats {
    /// Products of two matrix entries.
    pub scalar_mults: u64,
    /// Additions and subtractions of entries.
    pub scalar_adds: u64,
    /// Multiplications by a coefficient other than ±1.
    pub scalings: u64,
    pub t: usize,
    #[serde(skip)]
    pub elapsed: std::time::Duration,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExecOptions {
    /// Depth below which classical multiplication takes over (0 = never).
    pub cutoff: usize,
}

enum Coef<S> {
    One,
    MinusOne,
    Other(S),
}

// (row, coefficient) lists per column for one role, λ already substituted.
type Columns<S> = Vec<Vec<(usize, Coef<S>)>>;

fn substitute<S: Scalar>(mat: &crate::algorithm::CoefMatrix, lambda: Option<&BigRational>) -> Result<Columns<S>> {
    let one = BigRational::one();
    (0..mat.ncols())
        .map(|k| {
            mat.col(k)
                .iter()
                .filter_map(|(r, x)| {
                    let v = match (x.as_constant(), lambda) {
                        (Some(c), _) => Ok(c),
                        (None, Some(l)) => x.evaluate(l),
                        (None, None) => Err(Error::MissingLambda),
                    };
                    match v {
                        Err(e) => Some(Err(e)),
                        Ok(v) if v.is_zero() => None,
                        Ok(v) if v == one => Some(Ok((*r, Coef::One))),
                        Ok(v) if v == -one.clone() => Some(Ok((*r, Coef::MinusOne))),
                        Ok(v) => Some(Ok((*r, Coef::Other(S::from_rational(&v))))),
                    }
                })
                .collect()
        })
        .collect()
}

struct Plan<S> {
    m: usize,
    n: usize,
    p: usize,
    u: Columns<S>,
    v: Columns<S>,
    w: Columns<S>,
    cutoff: usize,
}

/// `acc (+)= coef · x`, counting the work.
fn axpy<S: Scalar>(acc: &mut Matrix<S>, coef: &Coef<S>, x: &Matrix<S>, first: bool, stats: &mut ExecStats) {
    let len = x.data.len() as u64;
    if first {
        acc.data.clone_from(&x.data);
        match coef {
            Coef::One => {}
            Coef::MinusOne => {
                for a in &mut acc.data {
                    *a = S::zero() - std::mem::replace(a, S::zero());
                }
            }
            Coef::Other(c) => {
                for a in &mut acc.data {
                    *a = c.clone() * &*a;
                }
                stats.scalings += len;
            }
        }
        return;
    }
    stats.scalar_adds += len;
    match coef {
        Coef::One => acc.data.iter_mut().zip(&x.data).for_each(|(a, b)| *a += b),
        Coef::MinusOne => acc.data.iter_mut().zip(&x.data).for_each(|(a, b)| *a -= b),
        Coef::Other(c) => {
            stats.scalings += len;
            acc.data.iter_mut().zip(&x.data).for_each(|(a, b)| *a += &(c.clone() * b));
        }
    }
}

impl<S: Scalar> Plan<S> {
    fn run(&self, a: &Matrix<S>, b: &Matrix<S>, depth: usize, stats: &mut ExecStats) -> Matrix<S> {
        if depth == 0 {
            stats.scalar_mults += 1;
            return Matrix {
                rows: 1,
                cols: 1,
                data: vec![a.data[0].clone() * &b.data[0]],
            };
        }
        if depth <= self.cutoff {
            let c = a.matmul(b).expect("shapes agree");
            stats.scalar_mults += (a.rows * a.cols * b.cols) as u64;
            stats.scalar_adds += (a.rows * (a.cols.saturating_sub(1)) * b.cols) as u64;
            return c;
        }
        let (ar, ac, bc) = (a.rows / self.m, a.cols / self.n, b.cols / self.p);
        let a_blocks: Vec<_> = (0..self.m * self.n).map(|x| a.block(x / self.n, x % self.n, ar, ac)).collect();
        let b_blocks: Vec<_> = (0..self.n * self.p).map(|x| b.block(x / self.p, x % self.p, ac, bc)).collect();
        let mut c_blocks = vec![None::<Matrix<S>>; self.m * self.p];

        let mut s = Matrix::zeros(ar, ac);
        let mut t = Matrix::zeros(ac, bc);
        for k in 0..self.u.len() {
            for (i, (r, coef)) in self.u[k].iter().enumerate() {
                axpy(&mut s, coef, &a_blocks[*r], i == 0, stats);
            }
            for (i, (r, coef)) in self.v[k].iter().enumerate() {
                axpy(&mut t, coef, &b_blocks[*r], i == 0, stats);
            }
            if self.u[k].is_empty() || self.v[k].is_empty() {
                continue;
            }
            let prod = self.run(&s, &t, depth - 1, stats);
            for (r, coef) in &self.w[k] {
                let slot = &mut c_blocks[*r];
                match slot {
                    None => {
                        let mut fresh = Matrix::zeros(ar, bc);
                        axpy(&mut fresh, coef, &prod, true, stats);
                        *slot = Some(fresh);
                    }
                    Some(acc) => axpy(acc, coef, &prod, false, stats),
                }
            }
        }

        let mut c = Matrix::zeros(a.rows, b.cols);
        for (x, blk) in c_blocks.into_iter().enumerate() {
            let Some(blk) = blk else { continue };
            let (bi, bj) = (x / self.p, x % self.p);
            for i in 0..ar {
                for j in 0..bc {
                    c.data[(bi * ar + i) * b.cols + bj * bc + j] = blk.data[i * bc + j].clone();
                }
            }
        }
        c
    }
}

/// Multiplies `m^t × n^t` by `n^t × p^t` with `t` levels of `alg`.
/// `lambda` is required when `alg` has λ-dependent coefficients.
pub fn multiply_recursive<S>(
    alg: &BilinearAlgorithm,
    a: &Matrix<S>,
    b: &Matrix<S>,
    t: usize,
    lambda: Option<&BigRational>,
) -> Result<(Matrix<S>, ExecStats)>
where
    S: Scalar,
{
    multiply_recursive_with(alg, a, b, t, lambda, ExecOptions::default())
}

pub fn multiply_recursive_with<S>(
    alg: &BilinearAlgorithm,
    a: &Matrix<S>,
    b: &Matrix<S>,
    t: usize,
    lambda: Option<&BigRational>,
    opts: ExecOptions,
) -> Result<(Matrix<S>, ExecStats)>
where
    S: Scalar,
{
    alg.check_shapes()?;
    let pow = |x: usize| x.checked_pow(t as u32).ok_or_else(|| Error::Dimension("size overflow".into()));
    let (mt, nt, pt) = (pow(alg.m)?, pow(alg.n)?, pow(alg.p)?);
    if (a.rows, a.cols, b.rows, b.cols) != (mt, nt, nt, pt) {
        return Err(Error::Dimension(format!(
            "expected {mt}x{nt} times {nt}x{pt}, got {}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let plan = Plan {
        m: alg.m,
        n: alg.n,
        p: alg.p,
        u: substitute(&alg.u, lambda)?,
        v: substitute(&alg.v, lambda)?,
        w: substitute(&alg.w, lambda)?,
        cutoff: opts.cutoff,
    };
    let start = Instant::now();
    let mut stats = ExecStats {
        t,
        ..Default::default()
    };
    let c = plan.run(a, b, t, &mut stats);
    stats.elapsed = start.elapsed();
    Ok((c, stats))
}

/// Random integer matrix with entries in `lo..=hi`.
pub fn random_int_matrix(rows: usize, cols: usize, lo: i64, hi: i64, rng: &mut impl Rng) -> Matrix<BigRational> {
    Matrix::from_fn(rows, cols, |_, _| BigRational::from_integer(BigInt::from(rng.gen_range(lo..=hi))))
}

/// Largest absolute entry of `x − y`.
pub fn max_abs_diff(x: &Matrix<BigRational>, y: &Matrix<BigRational>) -> BigRational {
    x.data
        .iter()
        .zip(&y.data)
        .map(|(a, b)| (a - b).abs())
        .max()
        .unwrap_or_else(BigRational::zero)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorPoint {
    #[serde(serialize_with = "ser_rational")]
    pub lambda: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub max_error: BigRational,
    /// `max_error / previous max_error`; `None` for the first point or when
    /// the previous error is zero.
    pub ratio_to_previous: Option<f64>,
}

fn ser_rational<Ser: serde::Serializer>(x: &BigRational, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
    s.serialize_str(&x.to_string())
}

/// Max-norm error of the recursive product over random ±1 matrices, for
/// each λ in decreasing order.
pub fn approximation_error(
    alg: &BilinearAlgorithm,
    t: usize,
    lambdas: &[BigRational],
    trials: usize,
    seed: u64,
) -> Result<Vec<ErrorPoint>> {
    let report = alg.validate()?;
    if !report.lambda_exact {
        return Err(Error::NotLambdaExact(alg.name.clone()));
    }
    let mut lambdas = lambdas.to_vec();
    lambdas.sort_by(|a, b| b.cmp(a));

    let (mt, nt, pt) = (alg.m.pow(t as u32), alg.n.pow(t as u32), alg.p.pow(t as u32));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<_> = (0..trials)
        .map(|_| {
            let sign = |rng: &mut ChaCha8Rng| if rng.gen::<bool>() { 1i64 } else { -1 };
            let a = Matrix::from_fn(mt, nt, |_, _| BigRational::from_integer(sign(&mut rng).into()));
            let b = Matrix::from_fn(nt, pt, |_, _| BigRational::from_integer(sign(&mut rng).into()));
            let c = a.matmul(&b).expect("conforming");
            (a, b, c)
        })
        .collect();

    let mut out: Vec<ErrorPoint> = Vec::with_capacity(lambdas.len());
    for lam in lambdas {
        let mut worst = BigRational::zero();
        if !report.exact {
            for (a, b, c) in &pairs {
                let (got, _) = multiply_recursive(alg, a, b, t, Some(&lam))?;
                worst = worst.max(max_abs_diff(&got, c));
            }
        }
        let ratio = out
            .last()
            .filter(|prev| !prev.max_error.is_zero())
            .and_then(|prev| (&worst / &prev.max_error).to_f64());
        out.push(ErrorPoint {
            lambda: lam,
            max_error: worst,
            ratio_to_previous: ratio,
        });
    }
    Ok(out)
}

/// Parses `3`, `-1/64` or `2^-6` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::Config(format!("cannot read `{text}` as a rational (try `1/64` or `2^-6`)"));
    let s = text.trim();
    if let Some((b, e)) = s.split_once('^') {
        let base: BigInt = b.trim().parse().map_err(|_| bad())?;
        let exp: i32 = e.trim().parse().map_err(|_| bad())?;
        if base.is_zero() && exp < 0 {
            return Err(bad());
        }
        let x = num_traits::pow(BigRational::from_integer(base), exp.unsigned_abs() as usize);
        return Ok(if exp < 0 { x.recip() } else { x });
    }
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}
