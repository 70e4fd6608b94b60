use serde::Serialize;

use super::functional::{evaluate, validate_functional, SteeringFunctional};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, HermitianOperator};
use crate::quantum::{strategy_outcome, validate_assemblage, Assemblage, ASSEMBLAGE_TOLERANCE};
use crate::sdp::{
    hermitian_basis, solve, BlockId, LinearForm, SdpProblem, SdpSolution, SolverSettings,
};

/// An assemblage is declared steerable iff μ* exceeds this.
pub const DECISION_TOLERANCE: f64 = 1e-7;
/// Positivity tolerance for extracted functionals.
pub const EXTRACTION_TOLERANCE: f64 = 1e-8;
/// Largest identity admixture accepted when repairing an extracted functional.
const MAX_REPAIR_WEIGHT: f64 = 1e-6;
/// Upper bound on the number of strategy blocks.
const MAX_STRATEGIES: usize = 128;

#[derive(Debug, Clone, Serialize)]
pub struct MembershipResult {
    /// Smallest μ with ω_i + μI ⪰ 0 for a decomposition of the assemblage.
    pub mu_star: f64,
    /// ω_i per deterministic strategy, i = Σ_x i_x·n^x.
    pub omegas: Vec<HermitianOperator>,
    /// Dual certificate for m=2, n=3: operators normalized to total trace one over all
    /// nine Z_ij, evaluating to −μ* at optimality. Absent for other shapes.
    pub functional: Option<SteeringFunctional>,
    pub sdp: SdpSolution,
    pub assemblage: Assemblage,
}

impl MembershipResult {
    pub fn steerable(&self) -> bool {
        self.mu_star > DECISION_TOLERANCE
    }

    pub fn converged(&self) -> bool {
        self.sdp.is_optimal()
    }
}

/// Minimizes μ subject to ρ_{a|x} = Σ_i δ_{i_x, a} ω_i and ω_i + μI ⪰ 0.
///
/// The outcome a = n of settings x ≥ 2 is left out: non-signalling makes it redundant, and
/// the corresponding dual operator is fixed to zero.
pub fn lhs_membership(e: &Assemblage) -> Result<MembershipResult> {
    lhs_membership_with(e, &SolverSettings::default())
}

pub fn lhs_membership_with(e: &Assemblage, settings: &SolverSettings) -> Result<MembershipResult> {
    let report = validate_assemblage(e, ASSEMBLAGE_TOLERANCE);
    if let Some(bad) = report.failures().next() {
        return Err(Error::InvalidAssemblage(format!(
            "{} ({:.3e})",
            bad.name, bad.value
        )));
    }
    let (m, n, d) = (e.settings(), e.outcomes(), e.dim());
    let count = n
        .checked_pow(m as u32)
        .filter(|&c| c <= MAX_STRATEGIES)
        .ok_or_else(|| {
            Error::InvalidAssemblage(format!("n^m exceeds {MAX_STRATEGIES} strategies"))
        })?;
    let per_outcome = (count / n) as f64;

    let mut p = SdpProblem::new();
    let blocks: Vec<BlockId> = (0..count).map(|_| p.add_block(d)).collect();
    let mu = p.add_scalar();
    p.set_objective(LinearForm::new().scalar(mu, 1.0));

    let basis = hermitian_basis(d);
    // (a, x, first constraint index) per group
    let mut groups = Vec::new();
    for x in 0..m {
        let outcomes = if x == 0 { n } else { n - 1 };
        for a in 0..outcomes {
            groups.push((a, x, p.constraints().len()));
            for b in &basis {
                let mut form = LinearForm::new();
                for (i, &id) in blocks.iter().enumerate() {
                    if strategy_outcome(i, x, n) == a {
                        form.push_block(id, b.clone());
                    }
                }
                form.push_scalar(mu, -per_outcome * b.trace());
                p.add_constraint(form, b.inner(e.member(a, x)));
            }
        }
    }

    let sol = solve(&p, settings)?;
    let mu_star = sol.scalar(mu);
    let id = HermitianOperator::identity(d);
    let omegas = blocks
        .iter()
        .map(|&b| HermitianOperator::linear_combination(&[(1.0, sol.block(b)), (-mu_star, &id)]))
        .collect();

    let functional = if (m, n) == (2, 3) {
        // G_{a|x} = −Σ_B y_B B; the dual slack of strategy (i, j) is G_{i|1} + G_{j|2}
        let g = |a: usize, x: usize| -> HermitianOperator {
            match groups.iter().find(|(ga, gx, _)| *ga == a && *gx == x) {
                Some(&(_, _, start)) => {
                    let idx: Vec<usize> = (start..start + basis.len()).collect();
                    let block = (0..count)
                        .find(|&i| strategy_outcome(i, x, n) == a)
                        .map(|i| blocks[i]);
                    sol.dual_operator(&p, &idx, block.expect("every outcome has a strategy"))
                        .scale(-1.0)
                }
                None => HermitianOperator::zeros(d),
            }
        };
        let g1: Vec<HermitianOperator> = (0..3).map(|a| g(a, 0)).collect();
        let g2: Vec<HermitianOperator> = (0..3).map(|a| g(a, 1)).collect();
        let sum = |a: &HermitianOperator, b: &HermitianOperator| a + b;
        Some(SteeringFunctional::new(
            g1[0].clone(),
            g1[1].clone(),
            sum(&g1[2], &g2[0]),
            sum(&g1[2], &g2[1]),
            sum(&g1[2], &g2[2]),
        )?)
    } else {
        None
    };

    Ok(MembershipResult {
        mu_star,
        omegas,
        functional,
        sdp: sol,
        assemblage: e.clone(),
    })
}

/// Best normalized inequality for the assemblage of a steerable membership result:
/// minimizes C(E) over functionals with unit-trace free operators and the four derived
/// operators PSD.
pub fn extract_inequality(r: &MembershipResult) -> Result<SteeringFunctional> {
    extract_inequality_with(r, &SolverSettings::default())
}

pub fn extract_inequality_with(
    r: &MembershipResult,
    settings: &SolverSettings,
) -> Result<SteeringFunctional> {
    if !r.steerable() {
        return Err(Error::NotSteerable(r.mu_star));
    }
    let e = &r.assemblage;
    if (e.settings(), e.outcomes(), e.dim()) != (2, 3, 3) {
        return Err(Error::InvalidAssemblage(
            "extraction needs m=2, n=3, d=3".into(),
        ));
    }
    let d = 3;
    let mut p = SdpProblem::new();
    // z[i][j] for 0-based outcomes
    let z: Vec<Vec<BlockId>> = (0..3)
        .map(|_| (0..3).map(|_| p.add_block(d)).collect())
        .collect();

    let rest = HermitianOperator::linear_combination(&[
        (1.0, &e.marginal(0)),
        (-1.0, e.member(0, 0)),
        (-1.0, e.member(1, 0)),
        (-1.0, e.member(0, 1)),
        (-1.0, e.member(1, 1)),
    ]);
    p.set_objective(
        LinearForm::new()
            .block(z[0][2], e.member(0, 0).clone())
            .block(z[1][2], e.member(1, 0).clone())
            .block(z[2][0], e.member(0, 1).clone())
            .block(z[2][1], e.member(1, 1).clone())
            .block(z[2][2], rest),
    );

    let basis = hermitian_basis(d);
    for (i, j) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        for b in &basis {
            let form = LinearForm::new()
                .block(z[i][j], b.clone())
                .block(z[i][2], b.scale(-1.0))
                .block(z[2][j], b.scale(-1.0))
                .block(z[2][2], b.clone());
            p.add_constraint(form, 0.0);
        }
    }
    let id = HermitianOperator::identity(d);
    for (i, j) in [(0, 2), (1, 2), (2, 0), (2, 1), (2, 2)] {
        p.add_constraint(LinearForm::new().block(z[i][j], id.clone()), 1.0);
    }

    let sol = solve(&p, settings)?;
    if !sol.is_optimal() {
        return Err(Error::Solver(format!(
            "extraction SDP ended with status {:?} after {} iterations (gap {:.3e})",
            sol.status, sol.iterations, sol.gap
        )));
    }
    let unit = |b: BlockId| {
        let op = sol.block(b);
        op.scale(1.0 / op.trace())
    };
    let f = SteeringFunctional::new(
        unit(z[0][2]),
        unit(z[1][2]),
        unit(z[2][0]),
        unit(z[2][1]),
        unit(z[2][2]),
    )?;
    let f = repair(f)?;

    let report = validate_functional(&f, EXTRACTION_TOLERANCE);
    if let Some(bad) = report.failures().next() {
        return Err(Error::InvalidCertificate(format!(
            "{} = {:.3e}",
            bad.name, bad.value
        )));
    }
    let c = evaluate(&f, e)?;
    if c.is_nan() || c >= 0.0 {
        return Err(Error::InvalidCertificate(format!(
            "extracted functional evaluates to {c:.3e} ≥ 0"
        )));
    }
    Ok(f)
}

/// Mixes in I/3 until all nine operators are PSD; the derived operators shift by the same
/// δ·I/3, so unit traces are preserved.
fn repair(f: SteeringFunctional) -> Result<SteeringFunctional> {
    let lmin = f.positivity_margin()?;
    if lmin >= 0.0 {
        return Ok(f);
    }
    let deficit = -lmin;
    // (1 − δ)λ + δ/3 ≥ 0 at λ = −deficit, with a little headroom
    let delta = (3.0 * deficit / (1.0 + 3.0 * deficit)) * (1.0 + 1e-6);
    if delta > MAX_REPAIR_WEIGHT {
        return Err(Error::InvalidCertificate(format!(
            "positivity defect {deficit:.3e} needs identity weight {delta:.3e}"
        )));
    }
    let third = HermitianOperator::identity(f.dim()).scale(1.0 / 3.0);
    let out =
        f.map(|z| HermitianOperator::linear_combination(&[(1.0 - delta, z), (delta, &third)]));
    debug_assert!(out
        .operators()
        .iter()
        .all(|(_, z)| min_eigenvalue(z).unwrap_or(-1.0) >= -1e-12));
    Ok(out)
}
