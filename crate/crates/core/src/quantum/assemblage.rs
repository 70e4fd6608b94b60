use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::measurement::MeasurementBasis;
use super::state::{random_psd, DensityOperator};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, ComplexMatrix, HermitianOperator};
use crate::report::ValidationReport;

/// Default tolerance for the assemblage invariants.
pub const ASSEMBLAGE_TOLERANCE: f64 = 1e-9;

/// Bob's conditional states ρ_{a|x}, unnormalized, for m settings with n outcomes each.
///
/// Indices are 0-based in the API and 1-based in the JSON form.
#[derive(Debug, Clone, PartialEq)]
pub struct Assemblage {
    m: usize,
    n: usize,
    d: usize,
    /// setting-major: members[x * n + a]
    members: Vec<HermitianOperator>,
}

impl Assemblage {
    /// Checks shapes only; use [`validate_assemblage`] for the physical invariants.
    pub fn new(m: usize, n: usize, members: Vec<HermitianOperator>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidAssemblage(
                "need at least one setting and one outcome".into(),
            ));
        }
        if members.len() != m * n {
            return Err(Error::InvalidAssemblage(format!(
                "expected {} members for m={m}, n={n}, got {}",
                m * n,
                members.len()
            )));
        }
        let d = members[0].dim();
        if members.iter().any(|r| r.dim() != d) {
            return Err(Error::InvalidAssemblage(
                "members have different dimensions".into(),
            ));
        }
        Ok(Self { m, n, d, members })
    }

    pub fn settings(&self) -> usize {
        self.m
    }

    pub fn outcomes(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn member(&self, a: usize, x: usize) -> &HermitianOperator {
        &self.members[x * self.n + a]
    }

    pub fn member_mut(&mut self, a: usize, x: usize) -> &mut HermitianOperator {
        &mut self.members[x * self.n + a]
    }

    pub fn probability(&self, a: usize, x: usize) -> f64 {
        self.member(a, x).trace()
    }

    /// Σ_a ρ_{a|x}.
    pub fn marginal(&self, x: usize) -> HermitianOperator {
        let terms: Vec<(f64, &HermitianOperator)> =
            (0..self.n).map(|a| (1.0, self.member(a, x))).collect();
        HermitianOperator::linear_combination(&terms)
    }

    /// Member-wise mixture p·self + (1 − p)·other.
    pub fn mix(&self, other: &Self, p: f64) -> Result<Self> {
        if (self.m, self.n, self.d) != (other.m, other.n, other.d) {
            return Err(Error::InvalidAssemblage(
                "cannot mix assemblages of different shape".into(),
            ));
        }
        let members = self
            .members
            .iter()
            .zip(&other.members)
            .map(|(a, b)| HermitianOperator::linear_combination(&[(p, a), (1.0 - p, b)]))
            .collect();
        Self::new(self.m, self.n, members)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
struct MemberJson {
    a: usize,
    x: usize,
    op: HermitianOperator,
}

#[derive(Serialize, Deserialize)]
struct AssemblageJson {
    m: usize,
    n: usize,
    d: usize,
    members: Vec<MemberJson>,
}

impl Serialize for Assemblage {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut members = Vec::with_capacity(self.members.len());
        for x in 0..self.m {
            for a in 0..self.n {
                members.push(MemberJson {
                    a: a + 1,
                    x: x + 1,
                    op: self.member(a, x).clone(),
                });
            }
        }
        AssemblageJson {
            m: self.m,
            n: self.n,
            d: self.d,
            members,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Assemblage {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = AssemblageJson::deserialize(de)?;
        let mut slots: Vec<Option<HermitianOperator>> = vec![None; raw.m * raw.n];
        for mem in raw.members {
            if mem.a == 0 || mem.a > raw.n || mem.x == 0 || mem.x > raw.m {
                return Err(D::Error::custom(format!(
                    "member index (a={}, x={}) out of range",
                    mem.a, mem.x
                )));
            }
            if mem.op.dim() != raw.d {
                return Err(D::Error::custom(format!(
                    "member (a={}, x={}) has dimension {}",
                    mem.a,
                    mem.x,
                    mem.op.dim()
                )));
            }
            let slot = &mut slots[(mem.x - 1) * raw.n + (mem.a - 1)];
            if slot.is_some() {
                return Err(D::Error::custom(format!(
                    "duplicate member (a={}, x={})",
                    mem.a, mem.x
                )));
            }
            *slot = Some(mem.op);
        }
        let members = slots
            .into_iter()
            .enumerate()
            .map(|(k, s)| {
                s.ok_or_else(|| {
                    D::Error::custom(format!(
                        "missing member (a={}, x={})",
                        k % raw.n + 1,
                        k / raw.n + 1
                    ))
                })
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Assemblage::new(raw.m, raw.n, members).map_err(D::Error::custom)
    }
}

/// ρ_{a|x} = Tr_A[(|v_{a|x}⟩⟨v_{a|x}| ⊗ I) ρ_AB] = (⟨v| ⊗ I) ρ_AB (|v⟩ ⊗ I).
pub fn assemblage_from_state(
    rho: &DensityOperator,
    bases: &[MeasurementBasis],
) -> Result<Assemblage> {
    assemblage_from_operator(rho.op(), rho.dims(), bases)
}

/// As [`assemblage_from_state`] for an operator that need not be a normalized state.
pub fn assemblage_from_operator(
    op: &HermitianOperator,
    dims: (usize, usize),
    bases: &[MeasurementBasis],
) -> Result<Assemblage> {
    let (da, db) = dims;
    if op.dim() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "operator of dimension {} for dims {da}x{db}",
            op.dim()
        )));
    }
    if bases.is_empty() {
        return Err(Error::InvalidAssemblage("no measurement bases".into()));
    }
    let n = bases[0].dim();
    if bases.iter().any(|b| b.dim() != da) {
        return Err(Error::DimensionMismatch(format!(
            "bases must act on dimension {da}"
        )));
    }
    let src = op.matrix();
    let mut members = Vec::with_capacity(bases.len() * n);
    for basis in bases {
        for a in 0..n {
            let v = basis.vector(a);
            let m = ComplexMatrix::from_fn(db, db, |ib, jb| {
                let mut acc = Complex64::new(0.0, 0.0);
                for ia in 0..da {
                    for ja in 0..da {
                        acc += v[ia].conj() * src[(ia * db + ib, ja * db + jb)] * v[ja];
                    }
                }
                acc
            });
            members.push(HermitianOperator::symmetrize(&m));
        }
    }
    Assemblage::new(bases.len(), n, members)
}

/// Checks positivity of every member, non-signalling against setting 1 and the
/// normalization of P(a|x) per setting.
pub fn validate_assemblage(e: &Assemblage, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new(tol);
    for x in 0..e.m {
        for a in 0..e.n {
            let lmin = min_eigenvalue(e.member(a, x)).unwrap_or(f64::NEG_INFINITY);
            report.at_least_zero(format!("psd rho_{}|{}", a + 1, x + 1), lmin);
        }
    }
    let reference = e.marginal(0);
    for x in 1..e.m {
        report.near_zero(
            format!("no-signalling setting {}", x + 1),
            e.marginal(x).max_abs_diff(&reference),
        );
    }
    for x in 0..e.m {
        let total: f64 = (0..e.n).map(|a| e.probability(a, x)).sum();
        report.near_zero(format!("normalization setting {}", x + 1), total - 1.0);
    }
    report
}

/// Outcome assigned to setting `x` by deterministic strategy `i` ∈ [0, n^m).
pub fn strategy_outcome(i: usize, x: usize, n: usize) -> usize {
    (i / n.pow(x as u32)) % n
}

/// Assemblage with an explicit LHS model: ρ_{a|x} = Σ_i δ_{i_x, a} ω_i for random PSD ω_i,
/// scaled to unit total trace. Returns the assemblage and the (scaled) ω's.
pub fn random_lhs_assemblage(
    m: usize,
    n: usize,
    d: usize,
    seed: u64,
) -> Result<(Assemblage, Vec<HermitianOperator>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = n
        .checked_pow(m as u32)
        .ok_or_else(|| Error::Domain("too many strategies".into()))?;
    let omegas: Vec<HermitianOperator> = (0..count)
        .map(|_| {
            let rank = rng.random_range(1..=d);
            random_psd(&mut rng, d, rank)
        })
        .collect();
    let total: f64 = omegas.iter().map(|w| w.trace()).sum();
    let omegas: Vec<HermitianOperator> = omegas.iter().map(|w| w.scale(1.0 / total)).collect();
    let e = assemblage_from_strategies(m, n, &omegas)?;
    Ok((e, omegas))
}

/// ρ_{a|x} = Σ_i δ_{i_x, a} ω_i.
pub fn assemblage_from_strategies(
    m: usize,
    n: usize,
    omegas: &[HermitianOperator],
) -> Result<Assemblage> {
    if omegas.len() != n.pow(m as u32) {
        return Err(Error::InvalidAssemblage(format!(
            "expected {} strategy operators",
            n.pow(m as u32)
        )));
    }
    let d = omegas[0].dim();
    let mut members = vec![HermitianOperator::zeros(d); m * n];
    for x in 0..m {
        for a in 0..n {
            let terms: Vec<(f64, &HermitianOperator)> = omegas
                .iter()
                .enumerate()
                .filter(|(i, _)| strategy_outcome(*i, x, n) == a)
                .map(|(_, w)| (1.0, w))
                .collect();
            members[x * n + a] = HermitianOperator::linear_combination(&terms);
        }
    }
    Assemblage::new(m, n, members)
}
