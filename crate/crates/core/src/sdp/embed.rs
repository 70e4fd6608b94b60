//! Real symmetric embedding H = R + iJ ↦ [[R, −J], [J, R]].
//!
//! The map is an injective *-homomorphism, so Ê(H) ⪰ 0 iff H ⪰ 0 and
//! ⟨Ê(A), Ê(B)⟩ = 2·Tr(AB).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::{ComplexMatrix, HermitianOperator};

pub fn embed_hermitian(h: &HermitianOperator) -> DMatrix<f64> {
    embed_complex(h.matrix())
}

pub(crate) fn embed_complex(m: &ComplexMatrix) -> DMatrix<f64> {
    let (r, c) = (m.rows(), m.cols());
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(r + i, c + j)] = z.re;
            out[(i, c + j)] = -z.im;
            out[(r + i, j)] = z.im;
        }
    }
    out
}

/// Inverse of the embedding on structured matrices; for unstructured input returns the
/// Hermitian operator whose embedding is nearest in Frobenius norm.
pub fn extract_hermitian(x: &DMatrix<f64>) -> HermitianOperator {
    let n = x.nrows() / 2;
    let m = ComplexMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (x[(i, j)] + x[(n + i, n + j)]);
        let im = 0.5 * (x[(n + i, j)] - x[(i, n + j)]);
        Complex64::new(re, im)
    });
    HermitianOperator::symmetrize(&m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_symmetric_input_is_duplicated() {
        let h = HermitianOperator::from_real_rows(&[&[1.0, 2.0], &[2.0, -3.0]]).unwrap();
        let e = embed_hermitian(&h);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(e[(i, j)], e[(i + 2, j + 2)]);
                assert_eq!(e[(i, j + 2)], 0.0);
                assert_eq!(e[(i + 2, j)], 0.0);
            }
        }
    }

    #[test]
    fn pauli_y_embedding_spectrum() {
        let m = ComplexMatrix::from_row_major(
            2,
            2,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let e = embed_hermitian(&HermitianOperator::new(m).unwrap());
        assert_eq!(e.transpose(), e);
        let mut ev: Vec<f64> = e.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn extraction_inverts_embedding() {
        let m = ComplexMatrix::from_row_major(
            2,
            2,
            vec![
                Complex64::new(0.7, 0.0),
                Complex64::new(0.1, 0.4),
                Complex64::new(0.1, -0.4),
                Complex64::new(-1.2, 0.0),
            ],
        )
        .unwrap();
        let h = HermitianOperator::new(m).unwrap();
        assert_eq!(extract_hermitian(&embed_hermitian(&h)), h);
    }
}
