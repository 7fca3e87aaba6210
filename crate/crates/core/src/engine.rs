//! End-to-end run of one scenario: initialization, optional presolve, solve
//! and audit.

use crate::error::Result;
use crate::scene::{initial_guess, jitter_weights, presolve, Scenario};
use crate::solver::assemble::Execution;
use crate::solver::{solve_with, Audit, InitStrategy, ScenarioProblem, SolveResult};

/// Amplitude of the seeded weight jitter.
pub const JITTER_AMPLITUDE: f64 = 0.05;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub max_iterations: Option<usize>,
    /// Seeds a small perturbation of the initial association weights.
    pub seed: Option<u64>,
    pub initialization: Option<InitStrategy>,
    pub execution: Execution,
}

#[derive(Debug, Clone)]
pub struct Run {
    pub problem: ScenarioProblem,
    pub init: Vec<f64>,
    pub result: SolveResult,
    pub audit: Audit,
}

pub fn run(scenario: Scenario, options: &RunOptions) -> Result<Run> {
    let mut config = scenario.solver.clone();
    if let Some(k) = options.max_iterations {
        config.max_iterations = k;
    }
    let strategy = options.initialization.unwrap_or(config.initialization);
    let problem = ScenarioProblem::build(scenario)?;
    let mut init = initial_guess(problem.scenario(), problem.layout(), strategy)?;
    if let Some(seed) = options.seed {
        jitter_weights(&mut init, problem.layout(), seed, JITTER_AMPLITUDE);
    }
    if strategy == InitStrategy::MultiObject && config.max_iterations > 0 {
        init = presolve(&problem, &init, &config, config.presolve_iterations)?;
    }
    let result = solve_with(&problem.problem, &init, &config, &[], options.execution)?;
    let audit = Audit::run(&problem.model, &result.x);
    Ok(Run {
        problem,
        init,
        result,
        audit,
    })
}

/// Continues from `x` on a (possibly modified) scenario with the same
/// layout.
pub fn resume(scenario: Scenario, x: &[f64], options: &RunOptions) -> Result<Run> {
    let mut config = scenario.solver.clone();
    if let Some(k) = options.max_iterations {
        config.max_iterations = k;
    }
    let problem = ScenarioProblem::build(scenario)?;
    let result = solve_with(&problem.problem, x, &config, &[], options.execution)?;
    let audit = Audit::run(&problem.model, &result.x);
    Ok(Run {
        problem,
        init: x.to_vec(),
        result,
        audit,
    })
}
