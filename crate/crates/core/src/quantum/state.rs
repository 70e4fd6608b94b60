use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    min_eigenvalue, partial_trace, partial_transpose, HermitianOperator, Subsystem,
};

/// Tolerance on trace and positivity for a density operator.
pub const STATE_TOLERANCE: f64 = 1e-9;

/// Normalized state. Single systems carry dims (d, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState")]
pub struct DensityOperator {
    dims: (usize, usize),
    op: HermitianOperator,
}

#[derive(Deserialize)]
struct RawState {
    dims: (usize, usize),
    op: HermitianOperator,
}

impl TryFrom<RawState> for DensityOperator {
    type Error = Error;

    fn try_from(raw: RawState) -> Result<Self> {
        Self::new(raw.op, raw.dims)
    }
}

impl DensityOperator {
    pub fn new(op: HermitianOperator, dims: (usize, usize)) -> Result<Self> {
        if op.dim() != dims.0 * dims.1 {
            return Err(Error::DimensionMismatch(format!(
                "operator of dimension {} does not match dims {}x{}",
                op.dim(),
                dims.0,
                dims.1
            )));
        }
        let tr = op.trace();
        if (tr - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::Domain(format!("state has trace {tr}")));
        }
        let lmin = min_eigenvalue(&op)?;
        if lmin < -STATE_TOLERANCE {
            return Err(Error::Domain(format!(
                "state has negative eigenvalue {lmin:.3e}"
            )));
        }
        Ok(Self { dims, op })
    }

    /// Divides by the trace before validating.
    pub fn normalized(op: &HermitianOperator, dims: (usize, usize)) -> Result<Self> {
        let tr = op.trace();
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::Domain(format!(
                "cannot normalize operator with trace {tr}"
            )));
        }
        Self::new(op.scale(1.0 / tr), dims)
    }

    pub fn pure(v: &[Complex64], dims: (usize, usize)) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::Domain("zero state vector".into()));
        }
        let u: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
        Self::new(HermitianOperator::projector(&u), dims)
    }

    pub fn product(a: &DensityOperator, b: &DensityOperator) -> Self {
        Self {
            dims: (a.dim(), b.dim()),
            op: a.op.kron(&b.op),
        }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(&self.op)
    }

    pub fn partial_transpose(&self) -> Result<HermitianOperator> {
        partial_transpose(&self.op, self.dims.0, self.dims.1)
    }

    /// Minimum eigenvalue of ρ^{T_A}.
    pub fn ppt_margin(&self) -> Result<f64> {
        min_eigenvalue(&self.partial_transpose()?)
    }

    pub fn reduced(&self, keep: Subsystem) -> Result<HermitianOperator> {
        let traced = match keep {
            Subsystem::A => Subsystem::B,
            Subsystem::B => Subsystem::A,
        };
        partial_trace(&self.op, self.dims.0, self.dims.1, traced)
    }

    /// (1 − ε)ρ + ε·I/d.
    pub fn mix_with_identity(&self, eps: f64) -> Self {
        let d = self.dim();
        let op = HermitianOperator::linear_combination(&[
            (1.0 - eps, &self.op),
            (eps / d as f64, &HermitianOperator::identity(d)),
        ]);
        Self {
            dims: self.dims,
            op,
        }
    }

    pub fn expectation(&self, w: &HermitianOperator) -> f64 {
        self.op.inner(w)
    }
}

/// Normalized complex Gaussian vector: Haar-distributed on the unit sphere.
pub fn random_pure_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Haar-random pure state on a single system of dimension `dim`, from ChaCha8 seeded with `seed`.
pub fn random_pure_state(dim: usize, seed: u64) -> Result<DensityOperator> {
    if dim < 2 {
        return Err(Error::Domain(format!("random state dimension {dim} < 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = random_pure_vector(&mut rng, dim);
    DensityOperator::pure(&v, (dim, 1))
}

/// Haar-random pure state on C^{dA} ⊗ C^{dB}.
pub fn random_bipartite_pure_state<R: Rng + ?Sized>(
    rng: &mut R,
    dims: (usize, usize),
) -> DensityOperator {
    let v = random_pure_vector(rng, dims.0 * dims.1);
    DensityOperator::pure(&v, dims).expect("unit vector gives a valid state")
}

/// Random mixed state: G·G†/Tr with a complex Gaussian G of the given rank.
pub fn random_mixed_state<R: Rng + ?Sized>(
    rng: &mut R,
    dims: (usize, usize),
    rank: usize,
) -> DensityOperator {
    let op = random_psd(rng, dims.0 * dims.1, rank);
    DensityOperator::normalized(&op, dims).expect("Gram matrix of a Gaussian is a valid state")
}

/// Unnormalized random PSD operator G·G† with G of size d×rank.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> HermitianOperator {
    let mut terms = Vec::with_capacity(rank);
    for _ in 0..rank.max(1) {
        let v: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        terms.push(HermitianOperator::projector(&v));
    }
    let refs: Vec<(f64, &HermitianOperator)> = terms.iter().map(|t| (1.0, t)).collect();
    HermitianOperator::linear_combination(&refs)
}
