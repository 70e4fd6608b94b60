use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, HermitianOperator};
use crate::quantum::Assemblage;
use crate::report::ValidationReport;

/// Tolerance on the unit-trace normalization of the free operators.
pub const TRACE_TOLERANCE: f64 = 1e-9;

/// Steering inequality for two settings with three outcomes on a qutrit, in terms of the
/// five free operators Z13, Z23, Z31, Z32, Z33. Z_ij pairs outcome i of setting 1 with
/// outcome j of setting 2; the other four follow from Z_ij = Z_i3 + Z_3j − Z_33.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFunctional")]
pub struct SteeringFunctional {
    pub z13: HermitianOperator,
    pub z23: HermitianOperator,
    pub z31: HermitianOperator,
    pub z32: HermitianOperator,
    pub z33: HermitianOperator,
    /// Family parameter, when the functional came from the analytic family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
}

#[derive(Deserialize)]
struct RawFunctional {
    z13: HermitianOperator,
    z23: HermitianOperator,
    z31: HermitianOperator,
    z32: HermitianOperator,
    z33: HermitianOperator,
    #[serde(default)]
    x: Option<f64>,
}

impl TryFrom<RawFunctional> for SteeringFunctional {
    type Error = Error;

    fn try_from(r: RawFunctional) -> Result<Self> {
        let mut f = Self::new(r.z13, r.z23, r.z31, r.z32, r.z33)?;
        f.x = r.x;
        Ok(f)
    }
}

fn combine(
    a: &HermitianOperator,
    b: &HermitianOperator,
    c: &HermitianOperator,
) -> HermitianOperator {
    HermitianOperator::linear_combination(&[(1.0, a), (1.0, b), (-1.0, c)])
}

impl SteeringFunctional {
    pub fn new(
        z13: HermitianOperator,
        z23: HermitianOperator,
        z31: HermitianOperator,
        z32: HermitianOperator,
        z33: HermitianOperator,
    ) -> Result<Self> {
        let d = z13.dim();
        if [&z23, &z31, &z32, &z33].iter().any(|z| z.dim() != d) {
            return Err(Error::DimensionMismatch(
                "functional operators differ in dimension".into(),
            ));
        }
        Ok(Self {
            z13,
            z23,
            z31,
            z32,
            z33,
            x: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.z13.dim()
    }

    pub fn z11(&self) -> HermitianOperator {
        combine(&self.z13, &self.z31, &self.z33)
    }

    pub fn z21(&self) -> HermitianOperator {
        combine(&self.z23, &self.z31, &self.z33)
    }

    pub fn z12(&self) -> HermitianOperator {
        combine(&self.z13, &self.z32, &self.z33)
    }

    pub fn z22(&self) -> HermitianOperator {
        combine(&self.z23, &self.z32, &self.z33)
    }

    /// Z_ij for outcomes i, j ∈ {1, 2, 3}.
    pub fn z(&self, i: usize, j: usize) -> HermitianOperator {
        match (i, j) {
            (1, 3) => self.z13.clone(),
            (2, 3) => self.z23.clone(),
            (3, 1) => self.z31.clone(),
            (3, 2) => self.z32.clone(),
            (3, 3) => self.z33.clone(),
            (1, 1) => self.z11(),
            (2, 1) => self.z21(),
            (1, 2) => self.z12(),
            (2, 2) => self.z22(),
            _ => panic!("outcome indices must lie in 1..=3, got ({i}, {j})"),
        }
    }

    /// All nine operators, labelled "Zij".
    pub fn operators(&self) -> Vec<(String, HermitianOperator)> {
        let mut out = Vec::with_capacity(9);
        for i in 1..=3 {
            for j in 1..=3 {
                out.push((format!("Z{i}{j}"), self.z(i, j)));
            }
        }
        out
    }

    /// Applies f to each free operator.
    pub fn map(&self, f: impl Fn(&HermitianOperator) -> HermitianOperator) -> Self {
        Self {
            z13: f(&self.z13),
            z23: f(&self.z23),
            z31: f(&self.z31),
            z32: f(&self.z32),
            z33: f(&self.z33),
            x: self.x,
        }
    }

    /// (1 − ε)Z + ε·I on every free operator; the derived ones shift the same way.
    pub fn mix_with_identity(&self, eps: f64) -> Self {
        let id = HermitianOperator::identity(self.dim());
        self.map(|z| {
            HermitianOperator::linear_combination(&[(1.0, &z.scale(1.0 - eps)), (eps, &id)])
        })
    }

    /// Smallest eigenvalue over all nine operators.
    pub fn positivity_margin(&self) -> Result<f64> {
        let mut lmin = f64::INFINITY;
        for (_, z) in self.operators() {
            lmin = lmin.min(min_eigenvalue(&z)?);
        }
        Ok(lmin)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// C(E) = Tr(Z13 ρ_{1|1}) + Tr(Z23 ρ_{2|1}) + Tr(Z31 ρ_{1|2}) + Tr(Z32 ρ_{2|2})
///        + Tr[Z33 (ρ − ρ_{1|1} − ρ_{2|1} − ρ_{1|2} − ρ_{2|2})], ρ = Σ_a ρ_{a|1}.
pub fn evaluate(z: &SteeringFunctional, e: &Assemblage) -> Result<f64> {
    if e.settings() != 2 || e.outcomes() != 3 || e.dim() != z.dim() {
        return Err(Error::DimensionMismatch(format!(
            "functional needs m=2, n=3, d={}; assemblage has m={}, n={}, d={}",
            z.dim(),
            e.settings(),
            e.outcomes(),
            e.dim()
        )));
    }
    let (r11, r21, r12, r22) = (
        e.member(0, 0),
        e.member(1, 0),
        e.member(0, 1),
        e.member(1, 1),
    );
    let rest = HermitianOperator::linear_combination(&[
        (1.0, &e.marginal(0)),
        (-1.0, r11),
        (-1.0, r21),
        (-1.0, r12),
        (-1.0, r22),
    ]);
    Ok(z.z13.inner(r11)
        + z.z23.inner(r21)
        + z.z31.inner(r12)
        + z.z32.inner(r22)
        + z.z33.inner(&rest))
}

/// Positivity of all nine operators (to `tol`) and unit trace of the five free ones
/// (to [`TRACE_TOLERANCE`]).
pub fn validate_functional(z: &SteeringFunctional, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new(tol);
    for (name, op) in z.operators() {
        let lmin = min_eigenvalue(&op).unwrap_or(f64::NEG_INFINITY);
        report.at_least_zero(format!("psd {name}"), lmin);
    }
    for (name, op) in [
        ("Z13", &z.z13),
        ("Z23", &z.z23),
        ("Z31", &z.z31),
        ("Z32", &z.z32),
        ("Z33", &z.z33),
    ] {
        let dev = op.trace() - 1.0;
        report.record(format!("trace {name}"), dev, dev.abs() <= TRACE_TOLERANCE);
    }
    report
}
