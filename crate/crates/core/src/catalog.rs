//! Built-in algorithms.
//!
//! The fast algorithms live as text files under `catalog/` in the crate and
//! are embedded at compile time. `classical(m,n,p)` is generated.
//!
//! [`resolve`] also understands small expressions:
//! `hk-323*hk-332` (tensor product), `bini-322-encA@r.t` (symmetry) and
//! `classical(2,3,4)`.

use crate::algorithm::{BilinearAlgorithm, CoefMatrix};
use crate::error::{Error, Result};
use crate::laurent::Laurent;
use crate::symmetry::Symmetry;
use crate::tensor::tensor_product;
use crate::textfmt;

const FILES: &[(&str, &str)] = &[
    ("strassen", include_str!("../catalog/strassen.alg")),
    ("bini-322-encA", include_str!("../catalog/bini-322-encA.alg")),
    ("bini-322-decC", include_str!("../catalog/bini-322-decC.alg")),
    ("bini-232-encA", include_str!("../catalog/bini-232-encA.alg")),
    ("bini-232-encB", include_str!("../catalog/bini-232-encB.alg")),
    ("bini-223-encB", include_str!("../catalog/bini-223-encB.alg")),
    ("bini-223-decC", include_str!("../catalog/bini-223-decC.alg")),
    ("hk-323", include_str!("../catalog/hk-323.alg")),
    ("hk-233", include_str!("../catalog/hk-233.alg")),
    ("hk-332", include_str!("../catalog/hk-332.alg")),
];

/// Names of the file-backed entries, in catalog order.
pub fn names() -> Vec<&'static str> {
    FILES.iter().map(|(n, _)| *n).collect()
}

/// Every named entry plus `classical(2,2,2)`.
pub fn all() -> Vec<BilinearAlgorithm> {
    let mut out = vec![classical(2, 2, 2)];
    out.extend(names().into_iter().map(|n| load(n).expect("embedded catalog parses")));
    out
}

/// The naive algorithm: one multiplication per `(i, j, l)`, column `(i·n + j)·p + l`.
pub fn classical(m: usize, n: usize, p: usize) -> BilinearAlgorithm {
    let q = m * n * p;
    let (mut u, mut v, mut w) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..m {
        for j in 0..n {
            for l in 0..p {
                let k = (i * n + j) * p + l;
                u.push((i * n + j, k, Laurent::one()));
                v.push((j * p + l, k, Laurent::one()));
                w.push((i * p + l, k, Laurent::one()));
            }
        }
    }
    let mk = |rows, t| CoefMatrix::from_triples(rows, q, t).expect("indices in range");
    BilinearAlgorithm::new(format!("classical({m},{n},{p})"), (m, n, p), mk(m * n, u), mk(n * p, v), mk(m * p, w))
        .expect("classical shapes are consistent")
}

/// Looks up a plain catalog name or `classical(m,n,p)`.
pub fn load(name: &str) -> Result<BilinearAlgorithm> {
    let name = name.trim();
    if let Some(args) = name.strip_prefix("classical(").and_then(|r| r.strip_suffix(')')) {
        let dims: Vec<usize> = args
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::UnknownAlgorithm(name.into()))?;
        return match dims[..] {
            [m, n, p] if m > 0 && n > 0 && p > 0 => Ok(classical(m, n, p)),
            _ => Err(Error::UnknownAlgorithm(name.into())),
        };
    }
    let (_, text) = FILES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownAlgorithm(name.into()))?;
    textfmt::parse(text, name)
}

/// Evaluates `factor*factor*...` where each factor is `name[@symmetry]`.
pub fn resolve(expr: &str) -> Result<BilinearAlgorithm> {
    let mut acc: Option<BilinearAlgorithm> = None;
    for factor in split_product(expr) {
        let (base, sym) = match factor.rsplit_once('@') {
            Some((b, s)) => (b, s.parse::<Symmetry>().map_err(|_| Error::UnknownAlgorithm(expr.into()))?),
            None => (factor, Symmetry::IDENTITY),
        };
        let alg = sym.apply(&load(base)?);
        acc = Some(match acc {
            None => alg,
            Some(prev) => tensor_product(&prev, &alg)?,
        });
    }
    acc.ok_or_else(|| Error::UnknownAlgorithm(expr.into()))
}

// `*` outside the parentheses of `classical(...)`.
fn split_product(expr: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0usize, 0usize);
    for (i, ch) in expr.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            '*' if depth == 0 => {
                out.push(expr[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(expr[start..].trim());
    out.retain(|s| !s.is_empty());
    out
}
