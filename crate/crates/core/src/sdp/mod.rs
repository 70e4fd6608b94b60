//! Small dense semidefinite programs over Hermitian blocks.

mod embed;
mod problem;
mod solver;

pub use embed::{embed_hermitian, extract_hermitian};
pub use problem::{
    BlockId, Constraint, LinearForm, ScalarId, SdpProblem, SdpSolution, SdpStatus, SolverSettings,
};
pub use solver::solve;

use crate::linalg::HermitianOperator;
use num_complex::Complex64;

/// Orthogonal basis of the real space of d×d Hermitian matrices: E_jj, E_jk + E_kj and
/// i(E_jk − E_kj) for j < k. Equating Tr(B·X) over this basis equates X entrywise.
pub fn hermitian_basis(d: usize) -> Vec<HermitianOperator> {
    let mut out = Vec::with_capacity(d * d);
    let unit = |entries: &[(usize, usize, Complex64)]| {
        let mut m = crate::linalg::ComplexMatrix::zeros(d, d);
        for &(i, j, v) in entries {
            m[(i, j)] = v;
        }
        HermitianOperator::new(m).expect("basis element is Hermitian")
    };
    let one = Complex64::new(1.0, 0.0);
    let i_unit = Complex64::new(0.0, 1.0);
    for j in 0..d {
        out.push(unit(&[(j, j, one)]));
    }
    for j in 0..d {
        for k in (j + 1)..d {
            out.push(unit(&[(j, k, one), (k, j, one)]));
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            out.push(unit(&[(j, k, i_unit), (k, j, -i_unit)]));
        }
    }
    out
}
