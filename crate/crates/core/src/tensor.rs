//! Tensor (Kronecker) products of bilinear algorithms.
//!
//! For `a1 = <m1,n1,p1>` and `a2 = <m2,n2,p2>` the product computes
//! `<m1 m2, n1 n2, p1 p2>` by running `a1` on blocks and `a2` inside each
//! block, exactly one level of the recursion. Entry `(i, j)` of the big `A`
//! is `(i1·m2 + i2, j1·n2 + j2)`, and column `k1·q2 + k2` pairs the
//! multiplications `k1` of `a1` and `k2` of `a2`.

use crate::algorithm::{BilinearAlgorithm, CoefMatrix};
use crate::error::Result;

/// Row permutation from Kronecker order to row-major order of the big
/// `(r1·r2) × (c1·c2)` operand.
fn block_rows(r1: usize, c1: usize, r2: usize, c2: usize) -> Vec<usize> {
    let cols = c1 * c2;
    let mut perm = vec![0; r1 * r2 * cols];
    for i1 in 0..r1 {
        for i2 in 0..r2 {
            for j1 in 0..c1 {
                for j2 in 0..c2 {
                    let new = (i1 * r2 + i2) * cols + j1 * c2 + j2;
                    perm[new] = (i1 * c1 + j1) * (r2 * c2) + i2 * c2 + j2;
                }
            }
        }
    }
    perm
}

fn kron_role(x: &CoefMatrix, y: &CoefMatrix, (r1, c1): (usize, usize), (r2, c2): (usize, usize)) -> CoefMatrix {
    x.kron(y).permute_rows(&block_rows(r1, c1, r2, c2))
}

pub fn tensor_product(a1: &BilinearAlgorithm, a2: &BilinearAlgorithm) -> Result<BilinearAlgorithm> {
    a1.check_shapes()?;
    a2.check_shapes()?;
    let (m1, n1, p1) = (a1.m, a1.n, a1.p);
    let (m2, n2, p2) = (a2.m, a2.n, a2.p);
    BilinearAlgorithm::new(
        format!("{}*{}", a1.name, a2.name),
        (m1 * m2, n1 * n2, p1 * p2),
        kron_role(&a1.u, &a2.u, (m1, n1), (m2, n2)),
        kron_role(&a1.v, &a2.v, (n1, p1), (n2, p2)),
        kron_role(&a1.w, &a2.w, (m1, p1), (m2, p2)),
    )
}

/// `alg ⊗ alg ⊗ ... ⊗ alg` (`t ≥ 1` factors).
pub fn tensor_power(alg: &BilinearAlgorithm, t: usize) -> Result<BilinearAlgorithm> {
    assert!(t >= 1, "tensor power needs at least one factor");
    let mut out = alg.clone();
    for _ in 1..t {
        out = tensor_product(&out, alg)?;
    }
    Ok(out.with_name(format!("{}^{t}", alg.name)))
}
