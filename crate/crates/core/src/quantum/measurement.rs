use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator};

/// Orthonormality and completeness tolerance for measurement bases.
pub const BASIS_TOLERANCE: f64 = 1e-10;

/// Rank-one projective measurement. Outcome `a` (0-based) projects onto `vectors[a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBasis {
    setting: usize,
    vectors: Vec<Vec<Complex64>>,
}

impl MeasurementBasis {
    pub fn new(setting: usize, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        let d = vectors.len();
        if d == 0 || vectors.iter().any(|v| v.len() != d) {
            return Err(Error::DimensionMismatch(
                "a basis needs d vectors of dimension d".into(),
            ));
        }
        for (i, u) in vectors.iter().enumerate() {
            for (j, v) in vectors.iter().enumerate() {
                let ip: Complex64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (ip - want).norm() > BASIS_TOLERANCE {
                    return Err(Error::Domain(format!(
                        "basis vectors {i} and {j} have overlap {ip}"
                    )));
                }
            }
        }
        Ok(Self { setting, vectors })
    }

    pub fn setting(&self) -> usize {
        self.setting
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, a: usize) -> &[Complex64] {
        &self.vectors[a]
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn projector(&self, a: usize) -> HermitianOperator {
        HermitianOperator::projector(&self.vectors[a])
    }

    /// max |Σ_a |v_a⟩⟨v_a| − I|.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        for v in &self.vectors {
            sum = &sum + &ComplexMatrix::outer(v, v);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }
}

fn real(v: [f64; 3]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// The two mutually unbiased qutrit bases of the counterexample. Setting 1 is real;
/// setting 2 uses q = exp(2πi/3).
pub fn mub_bases() -> (MeasurementBasis, MeasurementBasis) {
    let s3 = 1.0 / 3f64.sqrt();
    let s6 = 1.0 / 6f64.sqrt();
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let first = MeasurementBasis::new(
        1,
        vec![
            real([s3, -s6, -s2]),
            real([s3, -s6, s2]),
            real([s3, (2.0f64 / 3.0).sqrt(), 0.0]),
        ],
    )
    .expect("first basis is orthonormal");

    let q = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let i = Complex64::i();
    let zero = Complex64::new(0.0, 0.0);
    let second = MeasurementBasis::new(
        2,
        vec![
            vec![Complex64::new(1.0, 0.0), zero, zero],
            vec![zero, q * s2, i * q * s2],
            vec![zero, q.conj() * s2, -i * q.conj() * s2],
        ],
    )
    .expect("second basis is orthonormal");
    (first, second)
}
