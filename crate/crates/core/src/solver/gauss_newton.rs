//! Damped Gauss-Newton iteration with backtracking line search and an
//! optional multiplicative penalty continuation.

use serde::Serialize;

use crate::constraints::Family;
use crate::error::{Error, Result};

use super::assemble::{assemble, objective, Assembly, Execution};
use super::config::SolverConfig;
use super::linear::gauss_newton_step;
use super::problem::Problem;

/// Damping beyond which a run of rejected steps counts as a stall.
const DAMPING_CEILING: f64 = 1e16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTolerance,
    StepTolerance,
    MaxIterations,
    /// No step along which the line search could decrease the objective.
    Stalled,
}

impl Termination {
    pub fn converged(self) -> bool {
        matches!(self, Termination::GradientTolerance | Termination::StepTolerance)
    }

    pub fn name(self) -> &'static str {
        match self {
            Termination::GradientTolerance => "gradient_tolerance",
            Termination::StepTolerance => "step_tolerance",
            Termination::MaxIterations => "max_iterations",
            Termination::Stalled => "stalled",
        }
    }
}

/// State after one iteration. Record 0 of each round is the state the round
/// starts from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub round: usize,
    pub iteration: usize,
    pub objective: f64,
    pub gradient_norm: f64,
    pub damping: f64,
    pub step_norm: f64,
    pub accepted: bool,
    pub violations: Vec<(Family, f64)>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Vec<f64>,
    pub history: Vec<IterationRecord>,
    pub violations: Vec<(Family, f64)>,
    pub iterations: usize,
    pub termination: Termination,
}

impl SolveResult {
    pub fn objective(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.objective)
    }

    pub fn violation(&self, family: Family) -> Option<f64> {
        self.violations.iter().find(|(f, _)| *f == family).map(|(_, v)| *v)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn log_record(r: &IterationRecord) {
    if log::log_enabled!(target: "dtamp::solver", log::Level::Debug) {
        let mut line = format!(
            "round={} iter={} objective={:.9e} gradient={:.3e} damping={:.3e} step={:.3e} accepted={}",
            r.round, r.iteration, r.objective, r.gradient_norm, r.damping, r.step_norm, r.accepted
        );
        for (f, v) in &r.violations {
            line.push_str(&format!(" {f}={v:.3e}"));
        }
        log::debug!(target: "dtamp::solver", "{line}");
    }
}

/// Minimizes `½‖r(x)‖²` from `init`. Indices in `frozen` and the problem's
/// pinned indices keep their initial values.
pub fn solve(problem: &Problem, init: &[f64], config: &SolverConfig, frozen: &[usize]) -> Result<SolveResult> {
    solve_with(problem, init, config, frozen, Execution::default())
}

pub fn solve_with(
    problem: &Problem,
    init: &[f64],
    config: &SolverConfig,
    frozen: &[usize],
    execution: Execution,
) -> Result<SolveResult> {
    config.validate()?;
    let mask = problem.frozen_mask(frozen);
    let rounds = 1 + config.penalty_ramp.map_or(0, |r| r.rounds);
    let mut x = init.to_vec();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut termination = Termination::MaxIterations;
    let mut violations = Vec::new();

    for round in 0..rounds {
        let scale = config.penalty_ramp.map_or(1.0, |r| r.factor.powi(round as i32));
        let mut lambda = config.initial_damping;
        let mut asm: Assembly = assemble(problem, &x, scale, execution)?;
        let mut f = asm.objective();
        let mut g = masked(asm.gradient(), &mask);
        let record = |round, iteration, f, g: &[f64], lambda, step, accepted, asm: &Assembly| IterationRecord {
            round,
            iteration,
            objective: f,
            gradient_norm: inf_norm(g),
            damping: lambda,
            step_norm: step,
            accepted,
            violations: asm.violations.clone(),
        };
        history.push(record(round, 0, f, &g, lambda, 0.0, true, &asm));
        log_record(history.last().unwrap());
        termination = Termination::MaxIterations;

        for it in 1..=config.max_iterations {
            if inf_norm(&g) <= config.gradient_tolerance {
                termination = Termination::GradientTolerance;
                break;
            }
            let step = gauss_newton_step(
                &asm.jacobian,
                &asm.residual,
                lambda,
                &mask,
                config.max_factorization_retries,
                config.damping_increase,
                config.damping_floor,
            )?;
            lambda = step.damping;
            iterations += 1;
            let slope: f64 = g.iter().zip(&step.delta).map(|(a, b)| a * b).sum();
            let mut alpha = 1.0;
            let mut accepted = None;
            if slope < 0.0 {
                for _ in 0..=config.max_halvings {
                    let trial: Vec<f64> = x.iter().zip(&step.delta).map(|(a, d)| a + alpha * d).collect();
                    match objective(problem, &trial, scale, execution) {
                        Ok(ft) if ft <= f + config.sufficient_decrease * alpha * slope => {
                            accepted = Some((trial, ft));
                            break;
                        }
                        Ok(_) | Err(Error::NonFinite { .. }) => alpha *= config.line_search_factor,
                        Err(e) => return Err(e),
                    }
                }
            }
            match accepted {
                Some((trial, _)) => {
                    let step_norm = alpha * inf_norm(&step.delta);
                    x = trial;
                    asm = assemble(problem, &x, scale, execution)?;
                    f = asm.objective();
                    g = masked(asm.gradient(), &mask);
                    // A step the line search had to shorten counts as a
                    // rejection of the full step for the damping update.
                    lambda = if alpha == 1.0 {
                        (lambda * config.damping_decrease).max(config.damping_floor)
                    } else {
                        lambda.max(config.damping_floor) * config.damping_increase
                    };
                    history.push(record(round, it, f, &g, lambda, step_norm, true, &asm));
                    log_record(history.last().unwrap());
                    if step_norm <= config.step_tolerance {
                        termination = Termination::StepTolerance;
                        break;
                    }
                }
                None => {
                    lambda = lambda.max(config.damping_floor) * config.damping_increase;
                    history.push(record(round, it, f, &g, lambda, 0.0, false, &asm));
                    log_record(history.last().unwrap());
                    if lambda > DAMPING_CEILING {
                        termination = Termination::Stalled;
                        break;
                    }
                }
            }
        }
        if termination == Termination::MaxIterations && inf_norm(&g) <= config.gradient_tolerance {
            termination = Termination::GradientTolerance;
        }
        violations = asm.violations.clone();
    }

    Ok(SolveResult {
        x,
        history,
        violations,
        iterations,
        termination,
    })
}

fn masked(mut g: Vec<f64>, mask: &[bool]) -> Vec<f64> {
    for (v, &m) in g.iter_mut().zip(mask) {
        if m {
            *v = 0.0;
        }
    }
    g
}
