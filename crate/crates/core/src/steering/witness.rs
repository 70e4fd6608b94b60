use serde::Serialize;

use super::functional::SteeringFunctional;
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, partial_transpose, HermitianOperator};
use crate::quantum::{DensityOperator, MeasurementBasis};
use crate::sdp::{hermitian_basis, solve, LinearForm, SdpProblem, SdpSolution, SolverSettings};

/// Bipartite operator Tr(Wρ) = C(assemblage(ρ)); non-negative on separable states.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub w: HermitianOperator,
    pub functional: SteeringFunctional,
    pub bases: (MeasurementBasis, MeasurementBasis),
}

/// W = A_{1|1}⊗Z13 + A_{2|1}⊗Z23 + A_{1|2}⊗Z31 + A_{2|2}⊗Z32
///     + (I − A_{1|1} − A_{2|1} − A_{1|2} − A_{2|2})⊗Z33.
pub fn build_witness(
    z: &SteeringFunctional,
    bases: &(MeasurementBasis, MeasurementBasis),
) -> Result<Witness> {
    let (b1, b2) = bases;
    let da = b1.dim();
    if b2.dim() != da || b1.vectors().len() < 2 || b2.vectors().len() < 2 {
        return Err(Error::DimensionMismatch(
            "witness needs two bases of equal dimension".into(),
        ));
    }
    let a11 = b1.projector(0);
    let a21 = b1.projector(1);
    let a12 = b2.projector(0);
    let a22 = b2.projector(1);
    let rest = HermitianOperator::linear_combination(&[
        (1.0, &HermitianOperator::identity(da)),
        (-1.0, &a11),
        (-1.0, &a21),
        (-1.0, &a12),
        (-1.0, &a22),
    ]);
    let terms = [
        a11.kron(&z.z13),
        a21.kron(&z.z23),
        a12.kron(&z.z31),
        a22.kron(&z.z32),
        rest.kron(&z.z33),
    ];
    let refs: Vec<(f64, &HermitianOperator)> = terms.iter().map(|t| (1.0, t)).collect();
    Ok(Witness {
        w: HermitianOperator::linear_combination(&refs),
        functional: z.clone(),
        bases: bases.clone(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PptMinimum {
    /// Tr(W·state) for the returned (repaired) state.
    pub value: f64,
    pub state: DensityOperator,
    /// Optimal value reported by the SDP before repair.
    pub sdp_value: f64,
    pub psd_margin: f64,
    pub ppt_margin: f64,
    #[serde(skip)]
    pub sdp: SdpSolution,
}

/// Minimizes Tr(Wρ) over ρ ⪰ 0, ρ^{T_A} ⪰ 0, Tr ρ = 1.
pub fn min_over_ppt(w: &HermitianOperator, dims: (usize, usize)) -> Result<PptMinimum> {
    min_over_ppt_with(w, dims, &SolverSettings::default())
}

pub fn min_over_ppt_with(
    w: &HermitianOperator,
    dims: (usize, usize),
    settings: &SolverSettings,
) -> Result<PptMinimum> {
    let (da, db) = dims;
    let n = da * db;
    if w.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "witness of dimension {} for dims {da}x{db}",
            w.dim()
        )));
    }
    let mut p = SdpProblem::new();
    let rho = p.add_block(n);
    let sigma = p.add_block(n);
    p.set_objective(LinearForm::new().block(rho, w.clone()));
    // σ = ρ^{T_A}, using Tr(B ρ^{T_A}) = Tr(B^{T_A} ρ)
    for b in hermitian_basis(n) {
        let bt = partial_transpose(&b, da, db)?;
        p.add_constraint(
            LinearForm::new().block(sigma, b).block(rho, bt.scale(-1.0)),
            0.0,
        );
    }
    p.add_constraint(
        LinearForm::new().block(rho, HermitianOperator::identity(n)),
        1.0,
    );

    let sol = solve(&p, settings)?;
    if !sol.is_optimal() {
        return Err(Error::Solver(format!(
            "PPT minimization ended with status {:?} after {} iterations (gap {:.3e})",
            sol.status, sol.iterations, sol.gap
        )));
    }
    let raw = sol.block(rho);
    let raw = raw.scale(1.0 / raw.trace());
    let id = HermitianOperator::identity(n);
    let worst = min_eigenvalue(&raw)?.min(min_eigenvalue(&partial_transpose(&raw, da, db)?)?);
    // I/n is fixed by T_A, so mixing lifts both spectra by the same amount
    let repaired = if worst < 0.0 {
        let delta = (n as f64 * -worst) / (1.0 - n as f64 * worst);
        HermitianOperator::linear_combination(&[(1.0 - delta, &raw), (delta / n as f64, &id)])
    } else {
        raw
    };
    let state = DensityOperator::new(repaired, dims)?;
    Ok(PptMinimum {
        value: state.expectation(w),
        psd_margin: state.min_eigenvalue()?,
        ppt_margin: state.ppt_margin()?,
        state,
        sdp_value: sol.primal_value,
        sdp: sol,
    })
}
