//! Alternating search: best inequality for the current state's assemblage, then the best
//! PPT state for that inequality's witness, until the violation stops improving.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    assemblage_from_state, mub_bases, random_bipartite_pure_state, DensityOperator,
    MeasurementBasis,
};
use crate::sdp::SolverSettings;
use crate::steering::{
    build_witness, evaluate, extract_inequality_with, lhs_membership_with, min_over_ppt_with,
    SteeringFunctional, DECISION_TOLERANCE,
};

/// Allowed increase between consecutive phases before a round counts as non-monotone.
pub const MONOTONICITY_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub max_rounds: usize,
    /// Stop once successive state-phase values differ by less than this.
    pub stall_tolerance: f64,
    /// Random starting states tried before giving up.
    pub restart_budget: usize,
    pub solver: SolverSettings,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            max_rounds: 50,
            stall_tolerance: 1e-6,
            restart_budget: 100,
            solver: SolverSettings::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 {
            return Err(Error::Domain("max_rounds must be at least 1".into()));
        }
        if self.stall_tolerance.is_nan() || self.stall_tolerance <= 0.0 {
            return Err(Error::Domain("stall_tolerance must be positive".into()));
        }
        if self.restart_budget == 0 {
            return Err(Error::Domain("restart_budget must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Inequality,
    State,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub restart: usize,
    pub round: usize,
    pub phase: Phase,
    #[serde(rename = "C")]
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    ViolationFound,
    NoViolationFound,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub status: SearchStatus,
    /// +∞ when no violation was found.
    #[serde(rename = "best_C")]
    pub best_c: f64,
    pub best_state: Option<DensityOperator>,
    pub best_functional: Option<SteeringFunctional>,
    pub trace: Vec<TraceEntry>,
    pub restarts_used: usize,
    /// Phase transitions, from the first PPT state on, where C rose by more than
    /// [`MONOTONICITY_TOLERANCE`].
    pub monotonicity_violations: usize,
}

impl SearchResult {
    fn empty() -> Self {
        Self {
            status: SearchStatus::NoViolationFound,
            best_c: f64::INFINITY,
            best_state: None,
            best_functional: None,
            trace: Vec::new(),
            restarts_used: 0,
            monotonicity_violations: 0,
        }
    }
}

enum Attempt {
    /// No violation at the first round; try another start.
    Failed,
    Done,
}

struct Runner<'a> {
    config: &'a SearchConfig,
    bases: (MeasurementBasis, MeasurementBasis),
    result: SearchResult,
}

impl<'a> Runner<'a> {
    fn new(config: &'a SearchConfig) -> Self {
        Self {
            config,
            bases: mub_bases(),
            result: SearchResult::empty(),
        }
    }

    fn record(&mut self, restart: usize, round: usize, phase: Phase, c: f64) {
        if let Some(prev) = self.result.trace.last() {
            // the first PPT state opens the monotone part of a run
            let opened =
                prev.restart == restart && !(prev.round == 0 && prev.phase == Phase::Inequality);
            if opened && c > prev.c + MONOTONICITY_TOLERANCE {
                self.result.monotonicity_violations += 1;
            }
        }
        self.result.trace.push(TraceEntry {
            restart,
            round,
            phase,
            c,
        });
    }

    fn run(&mut self, start: DensityOperator, restart: usize) -> Result<Attempt> {
        let bases = [self.bases.0.clone(), self.bases.1.clone()];
        let mut state = start;
        let mut last_state_c: Option<f64> = None;
        for round in 0..self.config.max_rounds {
            let e = assemblage_from_state(&state, &bases)?;
            let membership = lhs_membership_with(&e, &self.config.solver)?;
            if !membership.steerable() {
                return Ok(if round == 0 {
                    Attempt::Failed
                } else {
                    Attempt::Done
                });
            }
            let functional = match extract_inequality_with(&membership, &self.config.solver) {
                Ok(f) => f,
                Err(_) if round == 0 => return Ok(Attempt::Failed),
                Err(_) => return Ok(Attempt::Done),
            };
            self.record(
                restart,
                round,
                Phase::Inequality,
                evaluate(&functional, &e)?,
            );

            let witness = build_witness(&functional, &self.bases)?;
            let min = min_over_ppt_with(&witness.w, (3, 3), &self.config.solver)?;
            if round == 0 && min.value >= -DECISION_TOLERANCE {
                self.result.trace.pop();
                return Ok(Attempt::Failed);
            }
            self.record(restart, round, Phase::State, min.value);
            if min.value < self.result.best_c {
                self.result.best_c = min.value;
                self.result.best_state = Some(min.state.clone());
                self.result.best_functional = Some(functional);
                self.result.status = SearchStatus::ViolationFound;
            }
            if let Some(prev) = last_state_c {
                if (prev - min.value).abs() < self.config.stall_tolerance {
                    break;
                }
            }
            last_state_c = Some(min.value);
            state = min.state;
        }
        Ok(Attempt::Done)
    }
}

/// Random pure starting states until one yields a PPT violation, which is then amplified.
pub fn seesaw(config: &SearchConfig) -> Result<SearchResult> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut runner = Runner::new(config);
    for restart in 0..config.restart_budget {
        runner.result.restarts_used = restart + 1;
        let start = random_bipartite_pure_state(&mut rng, (3, 3));
        if let Attempt::Done = runner.run(start, restart)? {
            break;
        }
    }
    Ok(runner.result)
}

/// The see-saw loop started from a given two-qutrit state.
pub fn amplify(state: &DensityOperator, config: &SearchConfig) -> Result<SearchResult> {
    config.validate()?;
    if state.dims() != (3, 3) {
        return Err(Error::DimensionMismatch(
            "amplify needs a two-qutrit state".into(),
        ));
    }
    let mut runner = Runner::new(config);
    runner.result.restarts_used = 1;
    runner.run(state.clone(), 0)?;
    Ok(runner.result)
}

/// Independent see-saw runs for seeds config.seed, config.seed + 1, ..., in parallel.
pub fn seesaw_many(config: &SearchConfig, runs: usize) -> Result<Vec<SearchResult>> {
    (0..runs as u64)
        .into_par_iter()
        .map(|k| {
            let c = SearchConfig {
                seed: config.seed.wrapping_add(k),
                ..*config
            };
            seesaw(&c)
        })
        .collect()
}
