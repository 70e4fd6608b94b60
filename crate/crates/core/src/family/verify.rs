use serde::{Deserialize, Serialize};

use super::published::{published_functional, published_state, PUBLISHED_PARAMS};
use super::{functional_family, state_family, FamilyParams};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, partial_transpose, HermitianOperator};
use crate::quantum::{assemblage_from_operator, mub_bases};
use crate::steering::evaluate;

/// Margins down to −MARGIN_TOLERANCE count as positive semidefinite.
pub const MARGIN_TOLERANCE: f64 = 1e-9;

/// Where the functional and state come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    /// Exact closed forms.
    Analytic,
    /// The printed four-digit vectors and matrix; only defined at the published parameters.
    Published,
}

impl DataSource {
    /// Published data for ε > 0 at the published parameters, analytic otherwise.
    pub fn auto(p: &FamilyParams, eps: f64) -> Self {
        if eps > 0.0 && is_published(p) {
            DataSource::Published
        } else {
            DataSource::Analytic
        }
    }
}

fn is_published(p: &FamilyParams) -> bool {
    (p.x - PUBLISHED_PARAMS.x).abs() < 1e-12
        && (p.m1 - PUBLISHED_PARAMS.m1).abs() < 1e-12
        && (p.m2 - PUBLISHED_PARAMS.m2).abs() < 1e-12
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedMargin {
    pub name: String,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub params: FamilyParams,
    pub epsilon: f64,
    pub data: DataSource,
    #[serde(rename = "C")]
    pub c: f64,
    /// Smallest eigenvalue of each of the nine mixed functional operators.
    pub functional_margins: Vec<NamedMargin>,
    pub state_min_eigenvalue: f64,
    pub ppt_min_eigenvalue: f64,
    pub tolerance: f64,
    /// C < 0 with every margin ≥ −tolerance.
    pub bound_entangled_and_steerable: bool,
}

impl VerifyReport {
    /// Smallest of all functional, state and PPT margins.
    pub fn min_margin(&self) -> f64 {
        self.functional_margins
            .iter()
            .map(|m| m.min_eigenvalue)
            .fold(
                self.state_min_eigenvalue.min(self.ppt_min_eigenvalue),
                f64::min,
            )
    }
}

/// Evaluates Z̃ = (1 − ε)Z + εI on ρ̃ = (1 − ε)ρ/Tr ρ + εI/9 with the two MUBs and reports
/// every positivity margin.
pub fn verify_counterexample(p: &FamilyParams, eps: f64, data: DataSource) -> Result<VerifyReport> {
    let p = FamilyParams::new(p.x, p.m1, p.m2)?;
    if !eps.is_finite() || !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("epsilon = {eps} outside [0, 1]")));
    }
    let (z, rho) = match data {
        DataSource::Analytic => (
            functional_family(p.x)?,
            state_family(p.m1, p.m2)?.op().clone(),
        ),
        DataSource::Published => {
            if !is_published(&p) {
                return Err(Error::Domain(format!(
                    "published data exist only for x = {}, m1 = {}, m2 = {}",
                    PUBLISHED_PARAMS.x, PUBLISHED_PARAMS.m1, PUBLISHED_PARAMS.m2
                )));
            }
            (published_functional(), published_state())
        }
    };
    let z = z.mix_with_identity(eps);
    let rho = HermitianOperator::linear_combination(&[
        ((1.0 - eps) / rho.trace(), &rho),
        (eps / 9.0, &HermitianOperator::identity(9)),
    ]);

    let (b1, b2) = mub_bases();
    let e = assemblage_from_operator(&rho, (3, 3), &[b1, b2])?;
    let c = evaluate(&z, &e)?;
    let functional_margins = z
        .operators()
        .into_iter()
        .map(|(name, op)| {
            Ok(NamedMargin {
                name,
                min_eigenvalue: min_eigenvalue(&op)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let state_min_eigenvalue = min_eigenvalue(&rho)?;
    let ppt_min_eigenvalue = min_eigenvalue(&partial_transpose(&rho, 3, 3)?)?;

    let mut report = VerifyReport {
        params: p,
        epsilon: eps,
        data,
        c,
        functional_margins,
        state_min_eigenvalue,
        ppt_min_eigenvalue,
        tolerance: MARGIN_TOLERANCE,
        bound_entangled_and_steerable: false,
    };
    report.bound_entangled_and_steerable = c < 0.0 && report.min_margin() >= -MARGIN_TOLERANCE;
    Ok(report)
}
