//! The bilinear algorithm data model and its validation against the
//! matrix-multiplication tensor.
//!
//! An algorithm for `<m,n,p> = q` is a triple of coefficient matrices:
//! `U` (`mn × q`), `V` (`np × q`) and `W` (`mp × q`). Row `i·n + j` of `U`
//! is the entry `A[i][j]` (row-major), likewise for `B` in `V` and `C` in `W`.
//! Column `k` describes the `k`-th scalar multiplication
//! `(Σ U[·,k] A) · (Σ V[·,k] B)` and the entries of `C` it contributes to.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::Laurent;

/// Sparse coefficient matrix stored by column; zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefMatrix {
    rows: usize,
    cols: Vec<Vec<(usize, Laurent)>>,
}

impl CoefMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols: vec![Vec::new(); cols],
        }
    }

    /// Builds from `(row, col, coeff)` triples. Duplicates are summed.
    pub fn from_triples(
        rows: usize,
        cols: usize,
        triples: impl IntoIterator<Item = (usize, usize, Laurent)>,
    ) -> Result<Self> {
        let mut m = Self::zeros(rows, cols);
        for (r, c, x) in triples {
            if r >= rows || c >= cols {
                return Err(Error::Malformed(format!(
                    "entry ({r},{c}) outside a {rows}x{cols} matrix"
                )));
            }
            m.add(r, c, &x);
        }
        Ok(m)
    }

    /// Dense integer rows, for hand-written tables.
    pub fn from_dense_ints(rows: &[&[i64]]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), ncols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "ragged dense table");
            for (c, &x) in row.iter().enumerate() {
                if x != 0 {
                    m.add(r, c, &Laurent::from_int(x));
                }
            }
        }
        m
    }

    fn add(&mut self, r: usize, c: usize, x: &Laurent) {
        let col = &mut self.cols[c];
        match col.binary_search_by_key(&r, |e| e.0) {
            Ok(i) => {
                col[i].1 += x;
                if col[i].1.is_zero() {
                    col.remove(i);
                }
            }
            Err(i) => {
                if !x.is_zero() {
                    col.insert(i, (r, x.clone()));
                }
            }
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    /// Nonzero entries of column `c`, ascending by row.
    pub fn col(&self, c: usize) -> &[(usize, Laurent)] {
        &self.cols[c]
    }

    pub fn get(&self, r: usize, c: usize) -> Laurent {
        let col = &self.cols[c];
        match col.binary_search_by_key(&r, |e| e.0) {
            Ok(i) => col[i].1.clone(),
            Err(_) => Laurent::zero(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    /// Nonzero entries of row `r`, ascending by column.
    pub fn row(&self, r: usize) -> Vec<(usize, Laurent)> {
        self.cols
            .iter()
            .enumerate()
            .filter_map(|(c, col)| {
                col.binary_search_by_key(&r, |e| e.0)
                    .ok()
                    .map(|i| (c, col[i].1.clone()))
            })
            .collect()
    }

    /// All rows at once, as sparse `(col, coeff)` lists.
    pub fn rows(&self) -> Vec<Vec<(usize, Laurent)>> {
        let mut out = vec![Vec::new(); self.rows];
        for (c, col) in self.cols.iter().enumerate() {
            for (r, x) in col {
                out[*r].push((c, x.clone()));
            }
        }
        out
    }

    /// New matrix whose row `i` is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.rows);
        let mut inverse = vec![0; self.rows];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let cols = self
            .cols
            .iter()
            .map(|col| {
                let mut c: Vec<_> = col.iter().map(|(r, x)| (inverse[*r], x.clone())).collect();
                c.sort_by_key(|e| e.0);
                c
            })
            .collect();
        Self {
            rows: self.rows,
            cols,
        }
    }

    /// Kronecker product: row `r1·rows2 + r2`, column `c1·cols2 + c2`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut cols = Vec::with_capacity(self.ncols() * other.ncols());
        for a in &self.cols {
            for b in &other.cols {
                let mut col = Vec::with_capacity(a.len() * b.len());
                for (ra, xa) in a {
                    for (rb, xb) in b {
                        col.push((ra * other.rows + rb, xa * xb));
                    }
                }
                cols.push(col);
            }
        }
        Self {
            rows: self.rows * other.rows,
            cols,
        }
    }

    /// True if every entry is free of λ.
    pub fn is_constant(&self) -> bool {
        self.cols.iter().flatten().all(|(_, x)| x.is_constant())
    }

    /// Sparsity pattern: for each column, the rows holding nonzeros.
    pub fn pattern(&self) -> Vec<Vec<usize>> {
        self.cols
            .iter()
            .map(|c| c.iter().map(|e| e.0).collect())
            .collect()
    }
}

/// A bilinear algorithm `<m,n,p> = q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearAlgorithm {
    pub name: String,
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub u: CoefMatrix,
    pub v: CoefMatrix,
    pub w: CoefMatrix,
}

/// Shape of an algorithm: `<m,n,p> = q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
}

impl Dims {
    pub fn mn(&self) -> usize {
        self.m * self.n
    }
    pub fn np(&self) -> usize {
        self.n * self.p
    }
    pub fn mp(&self) -> usize {
        self.m * self.p
    }
    /// `N* = max(mn, np, mp)`.
    pub fn n_star(&self) -> usize {
        self.mn().max(self.np()).max(self.mp())
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<{},{},{}>={}", self.m, self.n, self.p, self.q)
    }
}

impl BilinearAlgorithm {
    /// Checks shapes and builds the algorithm.
    pub fn new(
        name: impl Into<String>,
        (m, n, p): (usize, usize, usize),
        u: CoefMatrix,
        v: CoefMatrix,
        w: CoefMatrix,
    ) -> Result<Self> {
        let alg = Self {
            name: name.into(),
            m,
            n,
            p,
            u,
            v,
            w,
        };
        alg.check_shapes()?;
        Ok(alg)
    }

    pub fn check_shapes(&self) -> Result<()> {
        let (m, n, p) = (self.m, self.n, self.p);
        if m == 0 || n == 0 || p == 0 {
            return Err(Error::Malformed("dimensions must be positive".into()));
        }
        let q = self.u.ncols();
        if q == 0 {
            return Err(Error::Malformed("q must be positive".into()));
        }
        let expect = [("U", &self.u, m * n), ("V", &self.v, n * p), ("W", &self.w, m * p)];
        for (label, mat, rows) in expect {
            if mat.nrows() != rows || mat.ncols() != q {
                return Err(Error::Malformed(format!(
                    "{label} is {}x{}, expected {rows}x{q}",
                    mat.nrows(),
                    mat.ncols()
                )));
            }
        }
        Ok(())
    }

    pub fn q(&self) -> usize {
        self.u.ncols()
    }

    pub fn dims(&self) -> Dims {
        Dims {
            m: self.m,
            n: self.n,
            p: self.p,
            q: self.q(),
        }
    }

    /// True if no coefficient depends on λ.
    pub fn is_constant(&self) -> bool {
        self.u.is_constant() && self.v.is_constant() && self.w.is_constant()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Checks the generalized Brent equations
    /// `Σ_k U[a·n+b,k] V[c·p+d,k] W[e·p+f,k] = δ(b=c) δ(a=e) δ(d=f)`
    /// exactly, as Laurent polynomials.
    pub fn validate(&self) -> Result<ValidationReport> {
        self.check_shapes()?;
        let (m, n, p) = (self.m, self.n, self.p);

        // Only index triples reachable from some column can be nonzero, so
        // accumulate sparsely and then sweep the expected support.
        let mut sums: HashMap<(usize, usize, usize), Laurent> = HashMap::new();
        for k in 0..self.q() {
            for (iu, cu) in self.u.col(k) {
                for (iv, cv) in self.v.col(k) {
                    let uv = cu * cv;
                    for (iw, cw) in self.w.col(k) {
                        *sums.entry((*iu, *iv, *iw)).or_default() += &(&uv * cw);
                    }
                }
            }
        }
        for a in 0..m {
            for b in 0..n {
                for d in 0..p {
                    let key = (a * n + b, b * p + d, a * p + d);
                    *sums.entry(key).or_default() += &(-Laurent::one());
                }
            }
        }

        let mut failures: Vec<Failure> = sums
            .into_iter()
            .filter(|(_, r)| !r.is_zero())
            .map(|((iu, iv, iw), residual)| Failure {
                index: [iu / n, iu % n, iv / p, iv % p, iw / p, iw % p],
                residual,
            })
            .collect();
        failures.sort_by_key(|f| f.index);

        let exact = failures.is_empty();
        let lambda_exact = failures.iter().all(|f| !f.breaks_lambda_exactness());
        Ok(ValidationReport {
            exact,
            lambda_exact,
            failures,
        })
    }
}

/// A nonzero residual of the Brent equations at one index tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    /// `(a, b, c, d, e, f)`: `A[a][b]`, `B[c][d]`, `C[e][f]`.
    pub index: [usize; 6],
    pub residual: Laurent,
}

impl Failure {
    /// Residuals of degree ≥ 1 vanish as λ → 0; anything else does not.
    pub fn breaks_lambda_exactness(&self) -> bool {
        self.residual.min_degree().is_some_and(|k| k <= 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    /// Residual tensor identically zero.
    pub exact: bool,
    /// Degree-0 part equals the matmul tensor and no negative degrees remain.
    pub lambda_exact: bool,
    pub failures: Vec<Failure>,
}

impl ValidationReport {
    pub fn status(&self) -> &'static str {
        if self.exact {
            "exact"
        } else if self.lambda_exact {
            "lambda-exact"
        } else {
            "invalid"
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn classical_is_exact() {
        let alg = catalog::classical(2, 2, 2);
        let r = alg.validate().unwrap();
        assert!(r.exact && r.lambda_exact);
        assert_eq!(alg.q(), 8);
    }

    #[test]
    fn shape_mismatch_is_malformed() {
        let u = CoefMatrix::zeros(4, 3);
        let v = CoefMatrix::zeros(4, 3);
        let w = CoefMatrix::zeros(5, 3);
        let err = BilinearAlgorithm::new("bad", (2, 2, 2), u, v, w).unwrap_err();
        assert!(matches!(err, Error::Malformed(_)));
    }

    #[test]
    fn dropping_a_column_is_detected() {
        let alg = catalog::classical(2, 2, 2);
        let keep = |m: &CoefMatrix| {
            CoefMatrix::from_triples(
                m.nrows(),
                7,
                (0..7).flat_map(|c| m.col(c).iter().map(move |(r, x)| (*r, c, x.clone()))),
            )
            .unwrap()
        };
        let broken = BilinearAlgorithm::new("broken", (2, 2, 2), keep(&alg.u), keep(&alg.v), keep(&alg.w)).unwrap();
        let r = broken.validate().unwrap();
        assert!(!r.lambda_exact);
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.failures[0].residual, Laurent::from_int(-1));
    }

    #[test]
    fn permute_and_kron_shapes() {
        let m = CoefMatrix::from_dense_ints(&[&[1, 0], &[0, 2], &[3, 0]]);
        let p = m.permute_rows(&[2, 0, 1]);
        assert_eq!(p.get(0, 0), Laurent::from_int(3));
        assert_eq!(p.get(2, 1), Laurent::from_int(2));
        let k = m.kron(&CoefMatrix::from_dense_ints(&[&[1, 1]]));
        assert_eq!((k.nrows(), k.ncols()), (3, 4));
        assert_eq!(k.get(1, 3), Laurent::from_int(2));
        assert_eq!(k.nnz(), 6);
    }
}
