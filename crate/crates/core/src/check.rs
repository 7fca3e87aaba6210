//! Finite-difference validation of every block Jacobian.
//!
//! Raw (unpenalized) block values are differentiated by central differences
//! with respect to every variable, so that missing as well as wrong
//! derivative entries are caught.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constraints::{Family, RawBlock};
use crate::error::Result;
use crate::scene::initial_guess;
use crate::solver::assemble::{evaluate_blocks, Execution};
use crate::solver::{Problem, ScenarioProblem};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub states: usize,
    pub seed: u64,
    pub step: f64,
    /// Half-width of the uniform perturbation applied to the initial guess.
    pub spread: f64,
    /// Corrupts the analytic Jacobian of one family, to exercise the harness.
    pub perturb: Option<Family>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            states: 10,
            seed: 0,
            step: 1e-6,
            spread: 0.2,
            perturb: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyError {
    pub family: Family,
    pub worst: f64,
    pub block: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub states: usize,
    pub families: Vec<FamilyError>,
}

impl CheckReport {
    pub fn failing(&self, tolerance: f64) -> Vec<Family> {
        self.families
            .iter()
            .filter(|f| !(f.worst <= tolerance))
            .map(|f| f.family)
            .collect()
    }

    pub fn passed(&self, tolerance: f64) -> bool {
        self.failing(tolerance).is_empty()
    }
}

fn dense(raw: &RawBlock) -> HashMap<(usize, usize), f64> {
    let mut out = HashMap::new();
    for e in &raw.entries {
        *out.entry((e.row, e.col)).or_insert(0.0) += e.value;
    }
    out
}

/// Worst relative error of every block at `x`:
/// `max |analytic − fd| / max(1, max |fd|)`.
pub fn block_errors(problem: &Problem, x: &[f64], step: f64, perturb: Option<Family>) -> Vec<f64> {
    let base = evaluate_blocks(problem, x, Execution::default());
    let mut analytic: Vec<HashMap<(usize, usize), f64>> = base.iter().map(dense).collect();
    if let Some(family) = perturb {
        for (block, map) in problem.blocks.iter().zip(&mut analytic) {
            if block.family == family {
                for v in map.values_mut() {
                    *v += 1e-3;
                }
            }
        }
    }
    let mut diff = vec![0.0f64; problem.blocks.len()];
    let mut scale = vec![1.0f64; problem.blocks.len()];
    let mut xp = x.to_vec();
    for col in 0..problem.variable_count {
        xp[col] = x[col] + step;
        let plus = evaluate_blocks(problem, &xp, Execution::default());
        xp[col] = x[col] - step;
        let minus = evaluate_blocks(problem, &xp, Execution::default());
        xp[col] = x[col];
        for (b, (p, m)) in plus.iter().zip(&minus).enumerate() {
            for (row, (vp, vm)) in p.values.iter().zip(&m.values).enumerate() {
                let fd = (vp - vm) / (2.0 * step);
                let an = analytic[b].get(&(row, col)).copied().unwrap_or(0.0);
                diff[b] = diff[b].max((an - fd).abs());
                scale[b] = scale[b].max(fd.abs());
            }
        }
    }
    diff.iter().zip(&scale).map(|(d, s)| d / s).collect()
}

/// Runs the suite at `options.states` random states around the initial
/// guess and reports the worst error per family, each family once.
pub fn check_jacobians(sp: &ScenarioProblem, options: &CheckOptions) -> Result<CheckReport> {
    let problem = &sp.problem;
    let init = initial_guess(sp.scenario(), sp.layout(), sp.scenario().solver.initialization)?;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut families: Vec<FamilyError> = problem
        .families()
        .into_iter()
        .map(|family| FamilyError {
            family,
            worst: 0.0,
            block: String::new(),
        })
        .collect();
    for _ in 0..options.states {
        let x: Vec<f64> = init
            .iter()
            .map(|v| v + rng.random_range(-options.spread..=options.spread))
            .collect();
        let errors = block_errors(problem, &x, options.step, options.perturb);
        for (block, err) in problem.blocks.iter().zip(errors) {
            let f = families
                .iter_mut()
                .find(|f| f.family == block.family)
                .expect("family listed");
            if !(err <= f.worst) {
                f.worst = err;
                f.block = block.label.clone();
            }
        }
    }
    Ok(CheckReport {
        states: options.states,
        families,
    })
}
