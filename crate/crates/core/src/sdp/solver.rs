//! Primal-dual path-following interior point method (HKM direction, Mehrotra
//! predictor-corrector) on the real embedding of the Hermitian problem.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::embed::{embed_hermitian, extract_hermitian};
use super::problem::{LinearForm, SdpProblem, SdpSolution, SdpStatus, SolverSettings};
use crate::error::{Error, Result};
use crate::linalg::HermitianOperator;

type Entries = Vec<(usize, usize, f64)>;

/// Fraction of the distance to the cone boundary taken per step.
const STEP_FRACTION: f64 = 0.98;
/// Dual (primal) objective magnitude beyond which an improving ray is tested.
const DIVERGENCE_BOUND: f64 = 1e8;
const RAY_TOLERANCE: f64 = 1e-6;
/// Relative norm below which a constraint row counts as linearly dependent.
const DEPENDENCE_TOLERANCE: f64 = 1e-10;
const REFINEMENT_STEPS: usize = 2;

struct RealConstraint {
    blocks: Vec<(usize, Entries)>,
    scalars: Vec<(usize, f64)>,
    rhs: f64,
}

struct RealProblem {
    dims: Vec<usize>,
    c: Vec<DMatrix<f64>>,
    c_scalar: DVector<f64>,
    cons: Vec<RealConstraint>,
    /// Original index of each kept constraint.
    kept: Vec<usize>,
    /// Per block: (constraint index, position in that constraint's block list).
    by_block: Vec<Vec<(usize, usize)>>,
}

fn embed_form_blocks(form: &LinearForm, dims: &[usize]) -> Vec<(usize, DMatrix<f64>)> {
    let mut dense: Vec<Option<DMatrix<f64>>> = vec![None; dims.len()];
    for (id, a) in &form.blocks {
        let e = embed_hermitian(a) * 0.5;
        match &mut dense[id.0] {
            Some(m) => *m += e,
            slot => *slot = Some(e),
        }
    }
    dense
        .into_iter()
        .enumerate()
        .filter_map(|(k, m)| m.map(|m| (k, m)))
        .collect()
}

fn nonzeros(m: &DMatrix<f64>) -> Entries {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != 0.0 {
                out.push((i, j, v));
            }
        }
    }
    out
}

impl RealProblem {
    fn build(p: &SdpProblem) -> Result<Self> {
        let dims: Vec<usize> = p.block_dims().iter().map(|d| 2 * d).collect();
        let mut c: Vec<DMatrix<f64>> = dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (k, m) in embed_form_blocks(p.objective(), p.block_dims()) {
            c[k] = m;
        }
        let mut c_scalar = DVector::zeros(p.num_scalars());
        for (id, v) in &p.objective().scalars {
            c_scalar[id.0] += v;
        }

        let all: Vec<RealConstraint> = p
            .constraints()
            .iter()
            .map(|con| {
                let blocks = embed_form_blocks(&con.form, p.block_dims())
                    .into_iter()
                    .map(|(k, m)| (k, nonzeros(&m)))
                    .filter(|(_, e)| !e.is_empty())
                    .collect();
                let mut scalars: Vec<(usize, f64)> = Vec::new();
                for (id, v) in &con.form.scalars {
                    match scalars.iter_mut().find(|(j, _)| *j == id.0) {
                        Some((_, acc)) => *acc += v,
                        None => scalars.push((id.0, *v)),
                    }
                }
                scalars.retain(|(_, v)| *v != 0.0);
                RealConstraint {
                    blocks,
                    scalars,
                    rhs: con.rhs,
                }
            })
            .collect();

        let kept = independent_rows(&all, &dims, p.num_scalars())?;
        let mut cons = Vec::with_capacity(kept.len());
        let mut slots: Vec<Option<RealConstraint>> = all.into_iter().map(Some).collect();
        for &i in &kept {
            cons.push(slots[i].take().expect("kept indices are unique"));
        }

        let mut by_block = vec![Vec::new(); dims.len()];
        for (i, con) in cons.iter().enumerate() {
            for (t, (k, _)) in con.blocks.iter().enumerate() {
                by_block[*k].push((i, t));
            }
        }
        Ok(Self {
            dims,
            c,
            c_scalar,
            cons,
            kept,
            by_block,
        })
    }

    fn m(&self) -> usize {
        self.cons.len()
    }

    fn p(&self) -> usize {
        self.c_scalar.len()
    }

    fn b(&self) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.cons.iter().map(|c| c.rhs))
    }

    /// A(X) + B·s. Entries of `x` are read as stored, so a nonsymmetric argument is
    /// paired with the symmetric coefficients as ⟨A, sym(X)⟩.
    fn apply(&self, x: &[DMatrix<f64>], s: Option<&DVector<f64>>) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.cons.iter().map(|con| {
                let mut v = 0.0;
                for (k, entries) in &con.blocks {
                    let xk = &x[*k];
                    v += entries.iter().map(|&(r, c, a)| a * xk[(r, c)]).sum::<f64>();
                }
                if let Some(s) = s {
                    v += con.scalars.iter().map(|&(j, a)| a * s[j]).sum::<f64>();
                }
                v
            }),
        )
    }

    /// Σ_i y_i A_ik per block.
    fn adjoint_blocks(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (i, con) in self.cons.iter().enumerate() {
            if y[i] == 0.0 {
                continue;
            }
            for (k, entries) in &con.blocks {
                for &(r, c, a) in entries {
                    out[*k][(r, c)] += y[i] * a;
                }
            }
        }
        out
    }

    /// Bᵀy for the free scalars.
    fn adjoint_scalars(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.p());
        for (i, con) in self.cons.iter().enumerate() {
            for &(j, a) in &con.scalars {
                out[j] += a * y[i];
            }
        }
        out
    }

    fn scalar_matrix(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.m(), self.p());
        for (i, con) in self.cons.iter().enumerate() {
            for &(j, a) in &con.scalars {
                b[(i, j)] += a;
            }
        }
        b
    }

    /// HKM Schur complement M_ij = Σ_k Tr(A_ik X_k A_jk S_k⁻¹).
    fn schur(&self, x: &[DMatrix<f64>], s_inv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.m();
        let mut out = DMatrix::zeros(m, m);
        for (k, list) in self.by_block.iter().enumerate() {
            let n = self.dims[k];
            let xk = &x[k];
            let sk = &s_inv[k];
            for &(i, ti) in list {
                // columns of X·A_ik that can be nonzero
                let entries_i = &self.cons[i].blocks[ti].1;
                let mut cols: Vec<(usize, DVector<f64>)> = Vec::new();
                for &(r, c, a) in entries_i {
                    let pos = match cols.iter().position(|(cc, _)| *cc == c) {
                        Some(pos) => pos,
                        None => {
                            cols.push((c, DVector::zeros(n)));
                            cols.len() - 1
                        }
                    };
                    cols[pos].1.axpy(a, &xk.column(r), 1.0);
                }
                for &(j, tj) in list {
                    if j < i {
                        continue;
                    }
                    let entries_j = &self.cons[j].blocks[tj].1;
                    let mut v = 0.0;
                    for &(p, q, a) in entries_j {
                        // (X A_i S⁻¹)[q, p]
                        let mut e = 0.0;
                        for (c, col) in &cols {
                            e += col[q] * sk[(*c, p)];
                        }
                        v += a * e;
                    }
                    out[(j, i)] += v;
                    if i != j {
                        out[(i, j)] += v;
                    }
                }
            }
        }
        out
    }
}

/// Gram-Schmidt over the vectorized constraint rows; returns indices of a maximal
/// independent subset and rejects inconsistent dependent rows.
fn independent_rows(
    cons: &[RealConstraint],
    dims: &[usize],
    num_scalars: usize,
) -> Result<Vec<usize>> {
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0, |acc, &n| {
            let o = *acc;
            *acc += n * n;
            Some(o)
        })
        .collect();
    let len = dims.iter().map(|n| n * n).sum::<usize>() + num_scalars;
    let scalar_offset = len - num_scalars;

    let mut basis: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut kept = Vec::new();
    for (i, con) in cons.iter().enumerate() {
        let mut v = DVector::zeros(len);
        for (k, entries) in &con.blocks {
            for &(r, c, a) in entries {
                v[offsets[*k] + r * dims[*k] + c] += a;
            }
        }
        for &(j, a) in &con.scalars {
            v[scalar_offset + j] += a;
        }
        let norm0 = v.norm();
        let mut rhs = con.rhs;
        if norm0 == 0.0 {
            if rhs.abs() > DEPENDENCE_TOLERANCE {
                return Err(Error::MalformedProblem(format!(
                    "constraint {i} has no coefficients but right-hand side {rhs}"
                )));
            }
            continue;
        }
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for (q, qb) in &basis {
                let coef = v.dot(q);
                v.axpy(-coef, q, 1.0);
                rhs -= coef * qb;
            }
        }
        let norm = v.norm();
        if norm <= DEPENDENCE_TOLERANCE * norm0 {
            if rhs.abs() > 1e-8 * (1.0 + con.rhs.abs()) {
                return Err(Error::MalformedProblem(format!(
                    "constraint {i} is a linear combination of earlier constraints with an inconsistent right-hand side"
                )));
            }
            continue;
        }
        basis.push((v / norm, rhs / norm));
        kept.push(i);
    }
    Ok(kept)
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest α with X + α·dX ⪰ 0 given the Cholesky factor of X.
fn max_step(chol: &Cholesky<f64, Dyn>, dx: &DMatrix<f64>) -> f64 {
    let l = chol.l();
    let Some(t) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(w) = l.solve_lower_triangular(&t.transpose()) else {
        return 0.0;
    };
    let lambda_min = sym(&w)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if lambda_min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lambda_min
    }
}

struct Iterate {
    x: Vec<DMatrix<f64>>,
    s: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    free: DVector<f64>,
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    ds: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    dfree: DVector<f64>,
}

struct Kkt {
    m: DMatrix<f64>,
    chol_m: Cholesky<f64, Dyn>,
    /// M⁻¹B and (BᵀM⁻¹B)⁻¹ when free scalars are present.
    minv_b: DMatrix<f64>,
    k_inv: Option<DMatrix<f64>>,
}

impl Kkt {
    fn factor(m: DMatrix<f64>, b: &DMatrix<f64>) -> Option<Self> {
        let chol_m = cholesky_regularized(m.clone())?;
        let minv_b = chol_m.solve(b);
        let k_inv = if b.ncols() > 0 {
            let k = b.transpose() * &minv_b;
            Some(k.try_inverse()?)
        } else {
            None
        };
        Some(Self {
            m,
            chol_m,
            minv_b,
            k_inv,
        })
    }

    /// Solves [[M, B], [Bᵀ, 0]]·[dy; ds] = [r1; r2], with iterative refinement against the
    /// unregularized M.
    fn solve(
        &self,
        b: &DMatrix<f64>,
        r1: &DVector<f64>,
        r2: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let (mut dy, mut ds) = self.solve_once(b, r1, r2);
        for _ in 0..REFINEMENT_STEPS {
            let e1 = r1 - &self.m * &dy - b * &ds;
            let e2 = r2 - b.transpose() * &dy;
            let (cy, cs) = self.solve_once(b, &e1, &e2);
            dy += cy;
            ds += cs;
        }
        (dy, ds)
    }

    fn solve_once(
        &self,
        b: &DMatrix<f64>,
        r1: &DVector<f64>,
        r2: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let minv_r1 = self.chol_m.solve(r1);
        match &self.k_inv {
            Some(k_inv) => {
                let ds = k_inv * (b.transpose() * &minv_r1 - r2);
                let dy = minv_r1 - &self.minv_b * &ds;
                (dy, ds)
            }
            None => (minv_r1, DVector::zeros(0)),
        }
    }
}

fn cholesky_regularized(m: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    let scale = m.diagonal().iter().copied().fold(0.0, f64::max).max(1e-300);
    let mut delta = 1e-14 * scale;
    for _ in 0..8 {
        let mut reg = m.clone();
        for i in 0..reg.nrows() {
            reg[(i, i)] += delta;
        }
        if let Some(c) = Cholesky::new(reg) {
            return Some(c);
        }
        delta *= 100.0;
    }
    None
}

/// Solves `problem` to the tolerances in `settings`.
pub fn solve(problem: &SdpProblem, settings: &SolverSettings) -> Result<SdpSolution> {
    problem.validate()?;
    if settings.max_iterations == 0
        || settings.gap_tolerance.is_nan()
        || settings.gap_tolerance <= 0.0
        || settings.feas_tolerance.is_nan()
        || settings.feas_tolerance <= 0.0
    {
        return Err(Error::MalformedProblem(
            "solver settings need positive tolerances and iterations".into(),
        ));
    }
    let rp = RealProblem::build(problem)?;
    Solver::new(&rp, settings).run(problem)
}

struct Solver<'a> {
    rp: &'a RealProblem,
    settings: &'a SolverSettings,
    b: DVector<f64>,
    bmat: DMatrix<f64>,
    b_norm: f64,
    c_norm: f64,
    n_total: f64,
}

struct Residuals {
    primal: DVector<f64>,
    dual: Vec<DMatrix<f64>>,
    scalar: DVector<f64>,
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    mu: f64,
}

impl<'a> Solver<'a> {
    fn new(rp: &'a RealProblem, settings: &'a SolverSettings) -> Self {
        let b = rp.b();
        let c_norm = (rp.c.iter().map(|c| c.norm_squared()).sum::<f64>()
            + rp.c_scalar.norm_squared())
        .sqrt();
        Self {
            b_norm: b.norm(),
            b,
            bmat: rp.scalar_matrix(),
            c_norm,
            n_total: rp.dims.iter().sum::<usize>().max(1) as f64,
            rp,
            settings,
        }
    }

    fn initial_point(&self) -> Iterate {
        let rp = self.rp;
        let x = rp
            .dims
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let nf = n as f64;
                let mut xi = 10f64.max(nf.sqrt());
                for &(i, t) in &rp.by_block[k] {
                    let a_norm = rp.cons[i].blocks[t]
                        .1
                        .iter()
                        .map(|e| e.2 * e.2)
                        .sum::<f64>()
                        .sqrt();
                    xi = xi.max(nf * (1.0 + rp.cons[i].rhs.abs()) / (1.0 + a_norm));
                }
                DMatrix::identity(n, n) * xi
            })
            .collect();
        let s = rp
            .dims
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let nf = n as f64;
                let mut a_max: f64 = 0.0;
                for &(i, t) in &rp.by_block[k] {
                    let a_norm = rp.cons[i].blocks[t]
                        .1
                        .iter()
                        .map(|e| e.2 * e.2)
                        .sum::<f64>()
                        .sqrt();
                    a_max = a_max.max(a_norm);
                }
                let eta = 10f64
                    .max(nf.sqrt())
                    .max((1.0 + a_max.max(rp.c[k].norm())) / nf.sqrt());
                DMatrix::identity(n, n) * eta
            })
            .collect();
        Iterate {
            x,
            s,
            y: DVector::zeros(rp.m()),
            free: DVector::zeros(rp.p()),
        }
    }

    fn residuals(&self, it: &Iterate) -> Residuals {
        let rp = self.rp;
        let primal = &self.b - rp.apply(&it.x, Some(&it.free));
        let aty = rp.adjoint_blocks(&it.y);
        let dual: Vec<DMatrix<f64>> = (0..rp.dims.len())
            .map(|k| &rp.c[k] - &aty[k] - &it.s[k])
            .collect();
        let scalar = &rp.c_scalar - rp.adjoint_scalars(&it.y);
        let pobj = (0..rp.dims.len())
            .map(|k| inner(&rp.c[k], &it.x[k]))
            .sum::<f64>()
            + rp.c_scalar.dot(&it.free);
        let dobj = self.b.dot(&it.y);
        let dual_norm =
            (dual.iter().map(|d| d.norm_squared()).sum::<f64>() + scalar.norm_squared()).sqrt();
        let mu = (0..rp.dims.len())
            .map(|k| inner(&it.x[k], &it.s[k]))
            .sum::<f64>()
            / self.n_total;
        Residuals {
            pinf: primal.norm() / (1.0 + self.b_norm),
            dinf: dual_norm / (1.0 + self.c_norm),
            primal,
            dual,
            scalar,
            pobj,
            dobj,
            mu,
        }
    }

    /// Newton direction for complementarity target T (dX = sym(T − X·dS·S⁻¹)).
    fn direction(
        &self,
        it: &Iterate,
        res: &Residuals,
        s_inv: &[DMatrix<f64>],
        kkt: &Kkt,
        target: &[DMatrix<f64>],
    ) -> Direction {
        let rp = self.rp;
        let w: Vec<DMatrix<f64>> = (0..rp.dims.len())
            .map(|k| &target[k] - &it.x[k] * &res.dual[k] * &s_inv[k])
            .collect();
        let r1 = &res.primal - rp.apply(&w, None);
        let (dy, dfree) = kkt.solve(&self.bmat, &r1, &res.scalar);
        let at_dy = rp.adjoint_blocks(&dy);
        let ds: Vec<DMatrix<f64>> = (0..rp.dims.len())
            .map(|k| &res.dual[k] - &at_dy[k])
            .collect();
        let dx = (0..rp.dims.len())
            .map(|k| sym(&(&target[k] - &it.x[k] * &ds[k] * &s_inv[k])))
            .collect();
        Direction { dx, ds, dy, dfree }
    }

    fn step_lengths(
        &self,
        chol_x: &[Cholesky<f64, Dyn>],
        chol_s: &[Cholesky<f64, Dyn>],
        d: &Direction,
    ) -> (f64, f64) {
        let ap = chol_x
            .iter()
            .zip(&d.dx)
            .map(|(c, dx)| max_step(c, dx))
            .fold(f64::INFINITY, f64::min);
        let ad = chol_s
            .iter()
            .zip(&d.ds)
            .map(|(c, ds)| max_step(c, ds))
            .fold(f64::INFINITY, f64::min);
        (ap, ad)
    }

    fn run(&self, problem: &SdpProblem) -> Result<SdpSolution> {
        let rp = self.rp;
        let nb = rp.dims.len();
        let mut it = self.initial_point();
        let mut best: Option<(f64, Iterate, usize)> = None;
        let mut status = SdpStatus::MaxIterations;
        let mut iterations = 0;
        let mut stalled = 0;

        for iter in 0..=self.settings.max_iterations {
            iterations = iter;
            let res = self.residuals(&it);
            let gap = (res.pobj - res.dobj).abs();
            // complementarity ⟨X, S⟩ ≥ 0 on every iterate: pobj − dobj equals it at feasibility
            debug_assert!(
                res.mu >= -1e-12 * (1.0 + res.pobj.abs()),
                "negative complementarity {}",
                res.mu
            );

            let merit = res
                .pinf
                .max(res.dinf)
                .max(gap / self.settings.gap_tolerance * self.settings.feas_tolerance);
            if best.as_ref().is_none_or(|(m, _, _)| merit < *m) {
                best = Some((
                    merit,
                    Iterate {
                        x: it.x.clone(),
                        s: it.s.clone(),
                        y: it.y.clone(),
                        free: it.free.clone(),
                    },
                    iter,
                ));
            }
            if res.pinf <= self.settings.feas_tolerance
                && res.dinf <= self.settings.feas_tolerance
                && gap <= self.settings.gap_tolerance
            {
                status = SdpStatus::Optimal;
                best = None;
                break;
            }
            if let Some(s) = self.detect_infeasibility(&it, &res) {
                status = s;
                best = None;
                break;
            }
            if iter == self.settings.max_iterations {
                break;
            }

            let Some(chol_x) =
                it.x.iter()
                    .map(|x| Cholesky::new(x.clone()))
                    .collect::<Option<Vec<_>>>()
            else {
                break;
            };
            let Some(chol_s) =
                it.s.iter()
                    .map(|s| Cholesky::new(s.clone()))
                    .collect::<Option<Vec<_>>>()
            else {
                break;
            };
            let s_inv: Vec<DMatrix<f64>> = chol_s.iter().map(|c| c.inverse()).collect();
            let Some(kkt) = Kkt::factor(rp.schur(&it.x, &s_inv), &self.bmat) else {
                break;
            };

            // predictor
            let target: Vec<DMatrix<f64>> = it.x.iter().map(|x| -x).collect();
            let pred = self.direction(&it, &res, &s_inv, &kkt, &target);
            let (ap, ad) = self.step_lengths(&chol_x, &chol_s, &pred);
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let mu_aff = (0..nb)
                .map(|k| {
                    inner(
                        &(&it.x[k] + &pred.dx[k] * ap),
                        &(&it.s[k] + &pred.ds[k] * ad),
                    )
                })
                .sum::<f64>()
                / self.n_total;
            let sigma = if res.mu > 0.0 {
                (mu_aff / res.mu).clamp(0.0, 1.0).powi(3)
            } else {
                0.0
            };

            // corrector
            let target: Vec<DMatrix<f64>> = (0..nb)
                .map(|k| {
                    &s_inv[k] * (sigma * res.mu) - &it.x[k] - &pred.dx[k] * &pred.ds[k] * &s_inv[k]
                })
                .collect();
            let corr = self.direction(&it, &res, &s_inv, &kkt, &target);
            let (ap, ad) = self.step_lengths(&chol_x, &chol_s, &corr);
            let ap = (STEP_FRACTION * ap).min(1.0);
            let ad = (STEP_FRACTION * ad).min(1.0);

            for k in 0..nb {
                it.x[k] = sym(&(&it.x[k] + &corr.dx[k] * ap));
                it.s[k] = sym(&(&it.s[k] + &corr.ds[k] * ad));
            }
            it.free += &corr.dfree * ap;
            it.y += &corr.dy * ad;

            if ap.max(ad) < 1e-10 {
                stalled += 1;
                if stalled >= 3 {
                    break;
                }
            } else {
                stalled = 0;
            }
        }

        if let Some((_, b, _)) = best.take() {
            it = b;
        }
        Ok(self.assemble(problem, &it, status, iterations))
    }

    fn detect_infeasibility(&self, it: &Iterate, res: &Residuals) -> Option<SdpStatus> {
        let rp = self.rp;
        if res.dobj > DIVERGENCE_BOUND {
            // y/(bᵀy) with −A*(y) ⪰ 0 and Bᵀy = 0 certifies primal infeasibility
            let ray = &it.y / res.dobj;
            let neg = rp.adjoint_blocks(&ray);
            let scalar_ok = rp.adjoint_scalars(&ray).norm() <= RAY_TOLERANCE;
            let psd_ok = neg.iter().all(|a| {
                let lmin = (-a)
                    .symmetric_eigenvalues()
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                lmin >= -RAY_TOLERANCE * (1.0 + a.norm())
            });
            if scalar_ok && psd_ok {
                return Some(SdpStatus::Infeasible);
            }
        }
        if res.pobj < -DIVERGENCE_BOUND {
            // (X, s)/|⟨C, X⟩| with A(X) + Bs = 0 certifies unboundedness
            let scale = -res.pobj;
            let x: Vec<DMatrix<f64>> = it.x.iter().map(|x| x / scale).collect();
            let free = &it.free / scale;
            if rp.apply(&x, Some(&free)).norm() <= RAY_TOLERANCE {
                return Some(SdpStatus::Unbounded);
            }
        }
        None
    }

    fn assemble(
        &self,
        problem: &SdpProblem,
        it: &Iterate,
        status: SdpStatus,
        iterations: usize,
    ) -> SdpSolution {
        let rp = self.rp;
        let res = self.residuals(it);
        let blocks: Vec<HermitianOperator> = it.x.iter().map(extract_hermitian).collect();
        let mut dual = vec![0.0; problem.constraints().len()];
        for (i, &orig) in rp.kept.iter().enumerate() {
            dual[orig] = it.y[i];
        }
        let dual_slacks = problem
            .block_dims()
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                let mut terms: Vec<(f64, &HermitianOperator)> = Vec::new();
                for (id, a) in &problem.objective().blocks {
                    if id.0 == k {
                        terms.push((1.0, a));
                    }
                }
                for (i, con) in problem.constraints().iter().enumerate() {
                    if dual[i] == 0.0 {
                        continue;
                    }
                    for (id, a) in &con.form.blocks {
                        if id.0 == k {
                            terms.push((-dual[i], a));
                        }
                    }
                }
                if terms.is_empty() {
                    HermitianOperator::zeros(d)
                } else {
                    HermitianOperator::linear_combination(&terms)
                }
            })
            .collect();
        SdpSolution {
            status,
            blocks,
            scalars: it.free.iter().copied().collect(),
            dual,
            dual_slacks,
            primal_value: res.pobj,
            dual_value: res.dobj,
            gap: (res.pobj - res.dobj).abs(),
            primal_residual: res.pinf,
            dual_residual: res.dinf,
            iterations,
        }
    }
}
