//! Bipartite operations. Composite index convention: i = iA·dimB + iB.

use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, HermitianOperator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

fn check_dims(m: &HermitianOperator, dim_a: usize, dim_b: usize) -> Result<()> {
    if m.dim() != dim_a * dim_b {
        return Err(Error::DimensionMismatch(format!(
            "operator of dimension {} is not {dim_a}x{dim_b}",
            m.dim()
        )));
    }
    Ok(())
}

/// Transpose on the A factor: ⟨iA jB| M^{T_A} |kA lB⟩ = ⟨kA jB| M |iA lB⟩.
pub fn partial_transpose(
    m: &HermitianOperator,
    dim_a: usize,
    dim_b: usize,
) -> Result<HermitianOperator> {
    check_dims(m, dim_a, dim_b)?;
    let n = m.dim();
    let src = m.matrix();
    let out = ComplexMatrix::from_fn(n, n, |r, c| {
        let (ia, ib) = (r / dim_b, r % dim_b);
        let (ka, kb) = (c / dim_b, c % dim_b);
        src[(ka * dim_b + ib, ia * dim_b + kb)]
    });
    // a permutation of a Hermitian matrix's entries that stays Hermitian; no repair needed
    Ok(HermitianOperator::new(out).expect("partial transpose preserves Hermiticity"))
}

/// Traces out `traced`, returning the operator on the other factor.
pub fn partial_trace(
    m: &HermitianOperator,
    dim_a: usize,
    dim_b: usize,
    traced: Subsystem,
) -> Result<HermitianOperator> {
    check_dims(m, dim_a, dim_b)?;
    let src = m.matrix();
    let out = match traced {
        Subsystem::A => ComplexMatrix::from_fn(dim_b, dim_b, |i, j| {
            (0..dim_a)
                .map(|k| src[(k * dim_b + i, k * dim_b + j)])
                .sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b)
                .map(|k| src[(i * dim_b + k, j * dim_b + k)])
                .sum()
        }),
    };
    Ok(HermitianOperator::symmetrize(&out))
}

/// Tensor product of two general matrices.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}
