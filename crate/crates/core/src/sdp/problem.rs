use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::HermitianOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScalarId(pub usize);

/// Σ_k Tr(A_k X_k) + Σ_j a_j s_j. Repeated ids are summed.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LinearForm {
    pub blocks: Vec<(BlockId, HermitianOperator)>,
    pub scalars: Vec<(ScalarId, f64)>,
}

impl LinearForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn block(mut self, id: BlockId, coefficient: HermitianOperator) -> Self {
        self.blocks.push((id, coefficient));
        self
    }

    pub fn scalar(mut self, id: ScalarId, coefficient: f64) -> Self {
        self.scalars.push((id, coefficient));
        self
    }

    pub fn push_block(&mut self, id: BlockId, coefficient: HermitianOperator) {
        self.blocks.push((id, coefficient));
    }

    pub fn push_scalar(&mut self, id: ScalarId, coefficient: f64) {
        self.scalars.push((id, coefficient));
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .map(|(id, a)| (*id, a.scale(factor)))
                .collect(),
            scalars: self
                .scalars
                .iter()
                .map(|(id, a)| (*id, a * factor))
                .collect(),
        }
    }

    /// Value of the form at the given block and scalar values.
    pub fn evaluate(&self, blocks: &[HermitianOperator], scalars: &[f64]) -> f64 {
        let b: f64 = self
            .blocks
            .iter()
            .map(|(id, a)| a.inner(&blocks[id.0]))
            .sum();
        let s: f64 = self.scalars.iter().map(|(id, a)| a * scalars[id.0]).sum();
        b + s
    }
}

/// Linear equality Σ_k Tr(A_k X_k) + Σ_j a_j s_j = rhs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Constraint {
    pub form: LinearForm,
    pub rhs: f64,
}

/// minimize ⟨objective⟩ subject to the equality constraints, X_k ⪰ 0 (Hermitian) and free
/// real scalars.
///
/// The dual is: maximize Σ_i rhs_i·y_i subject to C_k − Σ_i y_i A_ik ⪰ 0 and
/// c_j − Σ_i y_i a_ij = 0.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SdpProblem {
    block_dims: Vec<usize>,
    num_scalars: usize,
    objective: LinearForm,
    constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, dim: usize) -> BlockId {
        self.block_dims.push(dim);
        BlockId(self.block_dims.len() - 1)
    }

    pub fn add_scalar(&mut self) -> ScalarId {
        self.num_scalars += 1;
        ScalarId(self.num_scalars - 1)
    }

    pub fn set_objective(&mut self, objective: LinearForm) {
        self.objective = objective;
    }

    pub fn add_constraint(&mut self, form: LinearForm, rhs: f64) {
        self.constraints.push(Constraint { form, rhs });
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_scalars(&self) -> usize {
        self.num_scalars
    }

    pub fn objective(&self) -> &LinearForm {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Checks ids and coefficient dimensions.
    pub fn validate(&self) -> Result<()> {
        if self.block_dims.is_empty() && self.num_scalars == 0 {
            return Err(Error::MalformedProblem("problem has no variables".into()));
        }
        if let Some(k) = self.block_dims.iter().position(|&d| d == 0) {
            return Err(Error::MalformedProblem(format!(
                "block {k} has dimension 0"
            )));
        }
        let check = |form: &LinearForm, what: &str| -> Result<()> {
            for (id, a) in &form.blocks {
                let dim = self.block_dims.get(id.0).ok_or_else(|| {
                    Error::MalformedProblem(format!("{what} references unknown block {}", id.0))
                })?;
                if a.dim() != *dim {
                    return Err(Error::MalformedProblem(format!(
                        "{what}: coefficient of dimension {} on block {} of dimension {dim}",
                        a.dim(),
                        id.0
                    )));
                }
            }
            for (id, a) in &form.scalars {
                if id.0 >= self.num_scalars {
                    return Err(Error::MalformedProblem(format!(
                        "{what} references unknown scalar {}",
                        id.0
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::MalformedProblem(format!(
                        "{what}: non-finite scalar coefficient"
                    )));
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for (i, c) in self.constraints.iter().enumerate() {
            check(&c.form, &format!("constraint {i}"))?;
            if !c.rhs.is_finite() {
                return Err(Error::MalformedProblem(format!(
                    "constraint {i}: non-finite right-hand side"
                )));
            }
        }
        Ok(())
    }

    /// JSON debug dump for reproducing solver issues.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub gap_tolerance: f64,
    pub feas_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            gap_tolerance: 1e-8,
            feas_tolerance: 1e-8,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Primal PSD blocks, in block-id order.
    pub blocks: Vec<HermitianOperator>,
    pub scalars: Vec<f64>,
    /// One multiplier per equality constraint.
    pub dual: Vec<f64>,
    /// C_k − Σ_i y_i A_ik, one per block.
    pub dual_slacks: Vec<HermitianOperator>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    /// ‖b − A(X)‖ / (1 + ‖b‖).
    pub primal_residual: f64,
    /// ‖C − A*(y) − S‖ / (1 + ‖C‖), including the free-scalar rows.
    pub dual_residual: f64,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    pub fn block(&self, id: BlockId) -> &HermitianOperator {
        &self.blocks[id.0]
    }

    pub fn scalar(&self, id: ScalarId) -> f64 {
        self.scalars[id.0]
    }

    /// Σ_i y_i A_ik over the listed constraints, for block k = `block`.
    pub fn dual_operator(
        &self,
        problem: &SdpProblem,
        constraints: &[usize],
        block: BlockId,
    ) -> HermitianOperator {
        let mut terms = Vec::new();
        for &i in constraints {
            for (id, a) in &problem.constraints[i].form.blocks {
                if *id == block {
                    terms.push((self.dual[i], a));
                }
            }
        }
        if terms.is_empty() {
            return HermitianOperator::zeros(problem.block_dims[block.0]);
        }
        HermitianOperator::linear_combination(&terms)
    }
}
