//! The six shape symmetries of the matrix-multiplication tensor.
//!
//! From an algorithm for `<m,n,p>` one gets algorithms for every permutation
//! of the shape by reassigning the roles of `U`, `V`, `W` and transposing
//! some of them. Transposing a role means reading the corresponding matrix
//! in column-major order: for an `r × c` operand, new row `y·r + x` is old row
//! `x·c + y`.
//!
//! The group is generated by
//!
//! * `T`, the transpose `C^T = B^T A^T`: `(U,V,W) → (V^T, U^T, W^T)`, shape `<p,n,m>`;
//! * `R`, the cyclic rotation: `(U,V,W) → (V, W^T, U^T)`, shape `<n,p,m>`.
//!
//! with `R^3 = T^2 = 1` and `T R = R^-1 T`. Every element is written
//! `R^cyc ∘ T^transpose`, i.e. transpose first, then rotate.

use std::fmt;
use std::str::FromStr;

use crate::algorithm::{BilinearAlgorithm, CoefMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symmetry {
    cyc: u8,
    transpose: bool,
}

impl Symmetry {
    pub const IDENTITY: Symmetry = Symmetry {
        cyc: 0,
        transpose: false,
    };

    pub fn new(cyc: u8, transpose: bool) -> Self {
        Self {
            cyc: cyc % 3,
            transpose,
        }
    }

    /// All six elements, identity first.
    pub fn all() -> [Symmetry; 6] {
        [
            Self::new(0, false),
            Self::new(1, false),
            Self::new(2, false),
            Self::new(0, true),
            Self::new(1, true),
            Self::new(2, true),
        ]
    }

    pub fn cyc(self) -> u8 {
        self.cyc
    }

    pub fn transposes(self) -> bool {
        self.transpose
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(self, other: Symmetry) -> Symmetry {
        // R^i T^j R^k T^l = R^(i ± k) T^(j + l), using T R^k = R^-k T.
        let k = if self.transpose { 3 - other.cyc } else { other.cyc };
        Symmetry::new(self.cyc + k, self.transpose ^ other.transpose)
    }

    pub fn inverse(self) -> Symmetry {
        if self.transpose {
            self
        } else {
            Symmetry::new(3 - self.cyc, false)
        }
    }

    /// Shape produced from `<m,n,p>`.
    pub fn shape(self, (m, n, p): (usize, usize, usize)) -> (usize, usize, usize) {
        let mut s = (m, n, p);
        if self.transpose {
            s = (s.2, s.1, s.0);
        }
        for _ in 0..self.cyc {
            s = (s.1, s.2, s.0);
        }
        s
    }

    /// Maps `alg` to an algorithm for `self.shape(alg shape)`. Column order is kept.
    pub fn apply(self, alg: &BilinearAlgorithm) -> BilinearAlgorithm {
        let mut out = alg.clone();
        if self.transpose {
            out = transpose_step(&out);
        }
        for _ in 0..self.cyc {
            out = rotate_step(&out);
        }
        out.name = if self == Self::IDENTITY {
            alg.name.clone()
        } else {
            format!("{}@{self}", alg.name)
        };
        out
    }
}

/// Row permutation reading an `r × c` operand column-major.
pub fn transposed_rows(r: usize, c: usize) -> Vec<usize> {
    let mut perm = Vec::with_capacity(r * c);
    for y in 0..c {
        for x in 0..r {
            perm.push(x * c + y);
        }
    }
    perm
}

fn tr(mat: &CoefMatrix, r: usize, c: usize) -> CoefMatrix {
    mat.permute_rows(&transposed_rows(r, c))
}

fn transpose_step(a: &BilinearAlgorithm) -> BilinearAlgorithm {
    let (m, n, p) = (a.m, a.n, a.p);
    BilinearAlgorithm {
        name: a.name.clone(),
        m: p,
        n,
        p: m,
        u: tr(&a.v, n, p),
        v: tr(&a.u, m, n),
        w: tr(&a.w, m, p),
    }
}

fn rotate_step(a: &BilinearAlgorithm) -> BilinearAlgorithm {
    let (m, n, p) = (a.m, a.n, a.p);
    BilinearAlgorithm {
        name: a.name.clone(),
        m: n,
        n: p,
        p: m,
        u: a.v.clone(),
        v: tr(&a.w, m, p),
        w: tr(&a.u, m, n),
    }
}

/// `id`, `r`, `r2`, `t`, `r.t`, `r2.t`.
impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rot = match self.cyc {
            0 => "",
            1 => "r",
            _ => "r2",
        };
        match (rot, self.transpose) {
            ("", false) => f.write_str("id"),
            ("", true) => f.write_str("t"),
            (r, false) => f.write_str(r),
            (r, true) => write!(f, "{r}.t"),
        }
    }
}

impl FromStr for Symmetry {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Symmetry::all()
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| format!("unknown symmetry `{s}` (expected id, r, r2, t, r.t, r2.t)"))
    }
}
