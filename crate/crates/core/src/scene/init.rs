//! Initial decision vectors.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::CUBOID_GRASP_ORIENTATIONS;
use crate::solver::{self, InitStrategy, ScenarioProblem, SolverConfig};

use super::layout::{SplineBlock, Target, VariableLayout};
use super::spec::Scenario;

/// Association weight every pair starts from.
pub const INITIAL_WEIGHT: f64 = 0.5;

/// Everything except the object trajectories: joints at rest with zero
/// tangents, weights 0.5 (1 between an articulated object and the objects it
/// carries), uniform rest and orientation weights, zero grasp parameters.
fn common(scenario: &Scenario, layout: &VariableLayout) -> Vec<f64> {
    let mut x = vec![0.0; layout.total_count()];
    for (robot, block) in scenario.robots.iter().zip(&layout.robots) {
        for s in 0..block.nodes {
            for (c, &q) in robot.rest.iter().enumerate() {
                x[block.value_index(s, c)] = q;
            }
        }
    }
    for pair in &layout.pairs {
        let w = match pair.target {
            Target::Object(_) if scenario.robots[pair.robot].is_interactive() => 1.0,
            _ => INITIAL_WEIGHT,
        };
        x[pair.weight.range()].fill(w);
        if let Some(blocks) = &pair.orientation {
            for b in blocks {
                x[b.range()].fill(1.0 / CUBOID_GRASP_ORIENTATIONS as f64);
            }
        }
    }
    for obj in &layout.objects {
        let uniform = 1.0 / obj.rest.len() as f64;
        for b in &obj.rest {
            x[b.range()].fill(uniform);
        }
    }
    x
}

fn set_node(x: &mut [f64], block: &SplineBlock, node: usize, value: &[f64; 6], tangent: &[f64; 6]) {
    for c in 0..6 {
        x[block.value_index(node, c)] = value[c];
        x[block.tangent_index(node, c)] = tangent[c];
    }
}

/// Objects hold their start pose on every node but the last, which holds
/// the goal pose.
pub fn initialize(scenario: &Scenario, layout: &VariableLayout) -> Vec<f64> {
    let mut x = common(scenario, layout);
    for (obj, blocks) in scenario.objects.iter().zip(&layout.objects) {
        let start = obj.start_pose.to_array();
        let goal = obj.goal_pose.to_array();
        let last = blocks.spline.nodes - 1;
        for s in 0..blocks.spline.nodes {
            let v = if s == last { &goal } else { &start };
            set_node(&mut x, &blocks.spline, s, v, &[0.0; 6]);
        }
    }
    x
}

/// Objects move with constant velocity from start to goal over the horizon.
pub fn initialize_linear(scenario: &Scenario, layout: &VariableLayout) -> Vec<f64> {
    let mut x = common(scenario, layout);
    let all = 0..layout.segments;
    for (obj, blocks) in scenario.objects.iter().zip(&layout.objects) {
        interpolate(
            &mut x,
            layout,
            &blocks.spline,
            &obj.start_pose.to_array(),
            &obj.goal_pose.to_array(),
            &all,
            false,
        );
    }
    x
}

/// Writes a start-hold, linear transport over `window`, goal-hold profile.
/// With `rest_at_ends` the tangents at the window boundaries are zero, so the
/// object is exactly still outside its window.
fn interpolate(
    x: &mut [f64],
    layout: &VariableLayout,
    block: &SplineBlock,
    start: &[f64; 6],
    goal: &[f64; 6],
    window: &Range<usize>,
    rest_at_ends: bool,
) {
    let len = (window.end - window.start) as f64;
    let slope: [f64; 6] = std::array::from_fn(|c| (goal[c] - start[c]) / (len * layout.segment_duration()));
    for s in 0..block.nodes {
        let frac = ((s as f64 - window.start as f64) / len).clamp(0.0, 1.0);
        let value: [f64; 6] = std::array::from_fn(|c| start[c] + frac * (goal[c] - start[c]));
        let inside = s >= window.start && s <= window.end;
        let boundary = s == window.start || s == window.end;
        let tangent = if inside && !(rest_at_ends && boundary) {
            slope
        } else {
            [0.0; 6]
        };
        set_node(x, block, s, &value, &tangent);
    }
}

/// Splits the segments into one contiguous window per object, in object
/// order, as evenly as possible.
pub fn transport_windows(segments: usize, objects: usize) -> Vec<Range<usize>> {
    (0..objects)
        .map(|k| (k * segments / objects)..((k + 1) * segments / objects))
        .collect()
}

/// Each object moves alone inside its own time window and is still
/// everywhere else.
pub fn initialize_multi_object(scenario: &Scenario, layout: &VariableLayout) -> Result<Vec<f64>> {
    let count = scenario.objects.len();
    if count == 0 || count > layout.segments {
        return Err(Error::InvalidScenario(format!(
            "windowed initialization needs between 1 and {} objects, got {count}",
            layout.segments
        )));
    }
    let mut x = common(scenario, layout);
    let windows = transport_windows(layout.segments, count);
    for ((obj, blocks), window) in scenario.objects.iter().zip(&layout.objects).zip(&windows) {
        interpolate(
            &mut x,
            layout,
            &blocks.spline,
            &obj.start_pose.to_array(),
            &obj.goal_pose.to_array(),
            window,
            true,
        );
    }
    Ok(x)
}

pub fn initial_guess(scenario: &Scenario, layout: &VariableLayout, strategy: InitStrategy) -> Result<Vec<f64>> {
    Ok(match strategy {
        InitStrategy::HoldThenGoal => initialize(scenario, layout),
        InitStrategy::Linear => initialize_linear(scenario, layout),
        InitStrategy::MultiObject => initialize_multi_object(scenario, layout)?,
    })
}

/// Adds uniform noise in `±amplitude` to every association weight, clamped
/// to `[0, 1]`. Deterministic in `seed`.
pub fn jitter_weights(x: &mut [f64], layout: &VariableLayout, seed: u64, amplitude: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for pair in &layout.pairs {
        for i in pair.weight.range() {
            x[i] = (x[i] + rng.random_range(-amplitude..=amplitude)).clamp(0.0, 1.0);
        }
    }
}

/// Indices of every object trajectory variable.
pub fn object_indices(layout: &VariableLayout) -> Vec<usize> {
    layout.objects.iter().flat_map(|o| o.spline.range()).collect()
}

/// Runs `iterations` solver iterations with the object trajectories frozen.
pub fn presolve(problem: &ScenarioProblem, init: &[f64], config: &SolverConfig, iterations: usize) -> Result<Vec<f64>> {
    if iterations == 0 {
        return Ok(init.to_vec());
    }
    let mut config = config.clone();
    config.max_iterations = iterations;
    config.penalty_ramp = None;
    let frozen = object_indices(problem.layout());
    Ok(solver::solve(&problem.problem, init, &config, &frozen)?.x)
}
