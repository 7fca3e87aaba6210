use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the decision vector is seeded before solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    /// Objects sit at their start pose on every node except the last, which
    /// holds the goal pose.
    #[default]
    HoldThenGoal,
    /// Objects are interpolated linearly from start to goal over the horizon.
    Linear,
    /// Objects move one after another in disjoint time windows, followed by
    /// a presolve with the object trajectories frozen.
    MultiObject,
}

/// Multiplicative penalty continuation: after each round the equality and
/// inequality penalty weights are multiplied by `factor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyRamp {
    pub factor: f64,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub step_tolerance: f64,
    pub initial_damping: f64,
    pub damping_increase: f64,
    pub damping_decrease: f64,
    pub damping_floor: f64,
    pub line_search_factor: f64,
    pub sufficient_decrease: f64,
    pub max_halvings: usize,
    pub max_factorization_retries: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty_ramp: Option<PenaltyRamp>,
    pub initialization: InitStrategy,
    pub presolve_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_tolerance: 1e-6,
            step_tolerance: 1e-9,
            initial_damping: 1e-3,
            damping_increase: 10.0,
            damping_decrease: 0.5,
            damping_floor: 1e-10,
            line_search_factor: 0.5,
            sufficient_decrease: 1e-4,
            max_halvings: 20,
            max_factorization_retries: 10,
            penalty_ramp: None,
            initialization: InitStrategy::HoldThenGoal,
            presolve_iterations: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gradient_tolerance", self.gradient_tolerance),
            ("step_tolerance", self.step_tolerance),
            ("damping_floor", self.damping_floor),
            ("damping_increase", self.damping_increase),
            ("damping_decrease", self.damping_decrease),
            ("line_search_factor", self.line_search_factor),
            ("sufficient_decrease", self.sufficient_decrease),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidScenario(format!("solver.{name} must be positive")));
            }
        }
        if self.initial_damping < self.damping_floor {
            return Err(Error::InvalidScenario(
                "solver.initial_damping must be at least solver.damping_floor".into(),
            ));
        }
        if !(self.line_search_factor < 1.0) {
            return Err(Error::InvalidScenario(
                "solver.line_search_factor must be below 1".into(),
            ));
        }
        if let Some(r) = &self.penalty_ramp {
            if !(r.factor >= 1.0) || r.rounds == 0 {
                return Err(Error::InvalidScenario(
                    "solver.penalty_ramp needs factor >= 1 and at least one round".into(),
                ));
            }
        }
        Ok(())
    }
}
