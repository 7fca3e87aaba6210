//! Post-solve checks computed directly from the decision vector, independent
//! of the penalty weights.

use serde::Serialize;

use crate::constraints::jet::{object_jet, robot_jet, target_jet, RobotFrame};
use crate::constraints::{path_samples, Model};
use crate::geometry::grasp::grasp_local;
use crate::geometry::pose::rotation_log;
use crate::scene::Target;
use crate::trajectory::SegmentPoint;

/// Largest translational grasp error over path samples where the pair's
/// weight exceeds `threshold`. Oriented pairs use their dominant
/// orientation.
pub fn position_violation(model: &Model, x: &[f64], threshold: f64) -> f64 {
    let layout = &model.layout;
    let mut worst: f64 = 0.0;
    for pair in &layout.pairs {
        for at in path_samples(layout.segments, layout.segment_duration()) {
            let seg = at.point.segment;
            if x[pair.weight.index(seg)] <= threshold {
                continue;
            }
            let k = pair.orientation.as_ref().map_or(0, |g| {
                (0..4)
                    .max_by(|&a, &b| x[g[a].index(seg)].total_cmp(&x[g[b].index(seg)]))
                    .unwrap_or(0)
            });
            let ee = robot_jet(model, x, pair.robot, RobotFrame::Tool, at.point);
            let obj = target_jet(model, x, pair.target, at.point);
            let angle = x[pair.theta_index()] + k as f64 * std::f64::consts::FRAC_PI_2;
            let local = grasp_local(x[pair.delta_index()], angle, &model.gripper_offsets[pair.robot]);
            let g = obj.position + obj.rotation * local.translation.vector;
            worst = worst.max((ee.position - g).norm());
        }
    }
    worst
}

/// Position and rotation distance of each object's final pose to its goal.
pub fn goal_errors(model: &Model, x: &[f64]) -> Vec<(f64, f64)> {
    let layout = &model.layout;
    let end = SegmentPoint {
        segment: layout.segments - 1,
        u: 1.0,
    };
    model
        .scenario
        .objects
        .iter()
        .enumerate()
        .map(|(j, o)| {
            let jet = object_jet(model, x, j, end);
            let goal = o.goal_pose.to_transform();
            let dp = (jet.position - goal.translation.vector).norm();
            let dr = rotation_log(&(goal.rotation.matrix().transpose() * jet.rotation)).norm();
            (dp, dr)
        })
        .collect()
}

/// Largest excess of `Σ_j w_ij` over 1.
pub fn capacity_violation(model: &Model, x: &[f64]) -> f64 {
    let layout = &model.layout;
    let mut worst: f64 = 0.0;
    for i in 0..model.scenario.robots.len() {
        for s in 0..layout.segments {
            let total: f64 = layout.pairs_of_robot(i).map(|p| x[p.weight.index(s)]).sum();
            worst = worst.max(total - 1.0);
        }
    }
    worst
}

/// Largest bound excess over joint node values, grasp offsets and all
/// schedule values.
pub fn bounds_violation(model: &Model, x: &[f64]) -> f64 {
    let layout = &model.layout;
    let excess = |v: f64, lo: f64, hi: f64| (lo - v).max(v - hi).max(0.0);
    let mut worst: f64 = 0.0;
    for (i, r) in model.scenario.robots.iter().enumerate() {
        let b = &layout.robots[i];
        for n in 0..layout.nodes() {
            for (c, j) in r.chain.joints.iter().enumerate() {
                worst = worst.max(excess(x[b.value_index(n, c)], j.limits[0], j.limits[1]));
            }
        }
    }
    for p in &layout.pairs {
        let half = match p.target {
            Target::Object(j) => model.scenario.objects[j].delta_limits()[1],
            Target::Handle(h) => model.scenario.robots[h]
                .interactive
                .as_ref()
                .map_or(0.0, |i| 0.5 * i.handle_length),
        };
        worst = worst.max(excess(x[p.delta_index()], -half, half));
    }
    for block in layout.schedule_blocks() {
        for &v in block.values(x) {
            worst = worst.max(excess(v, 0.0, 1.0));
        }
    }
    worst
}

/// Largest weight change between adjacent segments, per unit time.
pub fn max_weight_rate(model: &Model, x: &[f64]) -> f64 {
    let dt = model.segment_duration();
    let mut worst: f64 = 0.0;
    for p in &model.layout.pairs {
        for w in p.weight.values(x).windows(2) {
            worst = worst.max((w[1] - w[0]).abs() / dt);
        }
    }
    worst
}

/// A sample at which an object moves while not fully held.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeViolation {
    pub object: usize,
    pub time: f64,
    pub speed: f64,
    pub held: f64,
}

/// Samples where an object's twist norm exceeds `speed` while the sum of
/// its weights is below `held`.
pub fn mode_violations(model: &Model, x: &[f64], speed: f64, held: f64) -> Vec<ModeViolation> {
    let layout = &model.layout;
    let mut out = Vec::new();
    for j in 0..model.scenario.objects.len() {
        for at in path_samples(layout.segments, layout.segment_duration()) {
            let jet = object_jet(model, x, j, at.point);
            let v = (jet.linear_velocity.norm_squared() + jet.angular_velocity.norm_squared()).sqrt();
            let total: f64 = layout
                .pairs_of_target(Target::Object(j))
                .map(|p| x[p.weight.index(at.point.segment)])
                .sum();
            if v > speed && total < held {
                out.push(ModeViolation {
                    object: j,
                    time: at.time,
                    speed: v,
                    held: total,
                });
            }
        }
    }
    out
}

/// Segments in which each object is held with total weight above 1/2.
pub fn transport_windows(model: &Model, x: &[f64]) -> Vec<Vec<usize>> {
    let layout = &model.layout;
    (0..model.scenario.objects.len())
        .map(|j| {
            (0..layout.segments)
                .filter(|&s| {
                    layout
                        .pairs_of_target(Target::Object(j))
                        .map(|p| x[p.weight.index(s)])
                        .sum::<f64>()
                        > 0.5
                })
                .collect()
        })
        .collect()
}

/// Summary of every audit at default thresholds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Audit {
    pub position_violation: f64,
    pub goal_errors: Vec<(f64, f64)>,
    pub capacity_violation: f64,
    pub bounds_violation: f64,
    pub max_weight_rate: f64,
    pub mode_violations: usize,
    pub transport_windows: Vec<Vec<usize>>,
}

impl Audit {
    pub fn run(model: &Model, x: &[f64]) -> Self {
        Self {
            position_violation: position_violation(model, x, 0.1),
            goal_errors: goal_errors(model, x),
            capacity_violation: capacity_violation(model, x),
            bounds_violation: bounds_violation(model, x),
            max_weight_rate: max_weight_rate(model, x),
            mode_violations: mode_violations(model, x, 1e-3, 1.0 - 1e-2).len(),
            transport_windows: transport_windows(model, x),
        }
    }
}
