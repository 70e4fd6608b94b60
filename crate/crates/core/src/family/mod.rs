//! Closed-form counterexample: the functional family Z(x), the PPT state family
//! ρ(m1, m2) and the violation landscape over (x, m1, m2).

mod published;
mod scan;
mod verify;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::HermitianOperator;
use crate::quantum::{assemblage_from_state, mub_bases, DensityOperator};
use crate::steering::{evaluate, SteeringFunctional};

pub use published::{published_functional, published_state, PUBLISHED_PARAMS};
pub use scan::{scan, Grid, ScanRow, ScanTable};
pub use verify::{verify_counterexample, DataSource, VerifyReport};

/// Slack allowed on the boundaries of the parameter domain.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub x: f64,
    pub m1: f64,
    pub m2: f64,
}

impl FamilyParams {
    pub fn new(x: f64, m1: f64, m2: f64) -> Result<Self> {
        check_x(x)?;
        check_state_params(m1, m2)?;
        Ok(Self { x, m1, m2 })
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&x) {
        return Err(Error::Domain(format!("x outside [0, 0.5] (x = {x})")));
    }
    Ok(())
}

fn check_state_params(m1: f64, m2: f64) -> Result<()> {
    if !m1.is_finite() || !m2.is_finite() || m1 < 0.0 || m2 < 0.0 {
        return Err(Error::Domain(format!(
            "m1 = {m1}, m2 = {m2} must be finite and non-negative"
        )));
    }
    if m1 * m1 + m2 * m2 > 1.0 + DOMAIN_SLACK {
        return Err(Error::Domain(format!(
            "m1^2 + m2^2 <= 1 violated ({:.6})",
            m1 * m1 + m2 * m2
        )));
    }
    let q = m1 * m1 + m2 * m2 + m1 * m2;
    if q > 1.0 + DOMAIN_SLACK {
        return Err(Error::Domain(format!(
            "m1^2 + m2^2 + m1*m2 <= 1 violated ({q:.6})"
        )));
    }
    Ok(())
}

fn real_vec(v: [f64; 3]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// The vectors q+, q−, s, t of the family at parameter x.
pub fn family_vectors(x: f64) -> Result<[[f64; 3]; 4]> {
    check_x(x)?;
    let a = (2.0 * (1.0 + x) / 3.0).sqrt();
    let b = ((1.0 - 2.0 * x) / 4.0).sqrt();
    let c = (2.0 * (1.0 - 2.0 * x) / 3.0).sqrt() / (1.0 - x).sqrt();
    let q2 = (1.0 - a * a - b * b).max(0.0).sqrt();
    let s2 = (1.0 - a * a).max(0.0).sqrt();
    let t2 = (1.0 - c * c).max(0.0).sqrt();
    Ok([[a, q2, -b], [a, q2, b], [a, -s2, 0.0], [c, -t2, 0.0]])
}

/// Z13 = |q+⟩⟨q+|, Z23 = |q−⟩⟨q−|, Z32 = Z33 = |s⟩⟨s|, Z31 = (1 − x)|t⟩⟨t| + x|2⟩⟨2|.
pub fn functional_family(x: f64) -> Result<SteeringFunctional> {
    let [qp, qm, s, t] = family_vectors(x)?;
    let mut f = functional_from_vectors(x, qp, qm, s, t)?;
    f.x = Some(x);
    Ok(f)
}

pub(crate) fn functional_from_vectors(
    x: f64,
    qp: [f64; 3],
    qm: [f64; 3],
    s: [f64; 3],
    t: [f64; 3],
) -> Result<SteeringFunctional> {
    let ps = HermitianOperator::projector(&real_vec(s));
    let z31 = HermitianOperator::linear_combination(&[
        (1.0 - x, &HermitianOperator::projector(&real_vec(t))),
        (x, &HermitianOperator::diag(&[0.0, 0.0, 1.0])),
    ]);
    SteeringFunctional::new(
        HermitianOperator::projector(&real_vec(qp)),
        HermitianOperator::projector(&real_vec(qm)),
        z31,
        ps.clone(),
        ps,
    )
}

/// Weights (λ1, λ2, λ3) of the state family.
pub fn state_weights(m1: f64, m2: f64) -> Result<(f64, f64, f64)> {
    check_state_params(m1, m2)?;
    let d = 4.0 - 2.0 * m1 * m1 + m1 * m2 - 2.0 * m2 * m2;
    let l1 = 1.0 - (2.0 + 3.0 * m1 * m2) / d;
    let l3 = 1.0 / d;
    let l2 = 1.0 - l1 - 2.0 * l3;
    Ok((l1, l2, l3))
}

/// ρ = λ1|ψ1⟩⟨ψ1| + λ2|ψ2⟩⟨ψ2| + λ3(|ψ3⟩⟨ψ3| + |ψ̃3⟩⟨ψ̃3|), which equals its own
/// partial transpose.
pub fn state_family(m1: f64, m2: f64) -> Result<DensityOperator> {
    let (l1, l2, l3) = state_weights(m1, m2)?;
    let m3 = ((1.0 - m1 * m1 - m2 * m2) / 2.0).max(0.0).sqrt();
    let ket = |terms: &[(usize, usize, f64)]| {
        let mut v = vec![Complex64::new(0.0, 0.0); 9];
        for &(i, j, c) in terms {
            v[3 * i + j] += c;
        }
        v
    };
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let r3 = 1.0 / 3f64.sqrt();
    let psi1 = ket(&[(1, 2, r2), (2, 1, r2)]);
    let psi2 = ket(&[(0, 0, r3), (1, 1, r3), (2, 2, -r3)]);
    let psi3 = ket(&[(0, 1, m1), (1, 0, m2), (1, 1, m3), (2, 2, m3)]);
    let psi3t = ket(&[(0, 2, m1), (2, 0, -m2), (2, 1, m3), (1, 2, -m3)]);
    let p3 = HermitianOperator::projector(&psi3);
    let p3t = HermitianOperator::projector(&psi3t);
    let op = HermitianOperator::linear_combination(&[
        (l1, &HermitianOperator::projector(&psi1)),
        (l2, &HermitianOperator::projector(&psi2)),
        (l3, &p3),
        (l3, &p3t),
    ]);
    DensityOperator::new(op, (3, 3))
}

/// C of the family functional at x on the family state at (m1, m2), with the two MUBs.
pub fn violation(p: &FamilyParams) -> Result<f64> {
    FamilyParams::new(p.x, p.m1, p.m2)?;
    let (b1, b2) = mub_bases();
    let e = assemblage_from_state(&state_family(p.m1, p.m2)?, &[b1, b2])?;
    evaluate(&functional_family(p.x)?, &e)
}
