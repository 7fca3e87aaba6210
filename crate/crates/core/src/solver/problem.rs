//! Residual block registry: a generic least-squares problem and the block
//! set of a scenario.

use std::sync::Arc;

use crate::constraints::collision::{active_pairs, CollisionTerm};
use crate::constraints::kinematic::{PositionTerm, RestTerm, VelocityTerm};
use crate::constraints::sampling::boundary_samples;
use crate::constraints::schedule::{Bounds, ScheduleSum, WeightRate};
use crate::constraints::{
    collision_samples, path_samples, segment_samples, Family, Model, PenaltyKind, ResidualBlock, Sample,
};
use crate::error::Result;
use crate::objective::objective_blocks;
use crate::scene::{Scenario, Target, VariableLayout};
use crate::trajectory::SegmentPoint;

/// Sum of squared penalized residuals over `variable_count` unknowns.
/// Pinned indices never move.
#[derive(Debug, Clone)]
pub struct Problem {
    pub variable_count: usize,
    pub blocks: Vec<ResidualBlock>,
    pub pinned: Vec<usize>,
}

impl Problem {
    pub fn row_count(&self) -> usize {
        self.blocks.iter().map(ResidualBlock::row_count).sum()
    }

    pub fn families(&self) -> Vec<Family> {
        let mut out: Vec<Family> = self.blocks.iter().map(|b| b.family).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Pinned indices merged with `extra`, as a per-variable mask.
    pub fn frozen_mask(&self, extra: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.variable_count];
        for &i in self.pinned.iter().chain(extra) {
            if i < mask.len() {
                mask[i] = true;
            }
        }
        mask
    }
}

/// The problem of one scenario together with the model its terms share.
#[derive(Debug, Clone)]
pub struct ScenarioProblem {
    pub model: Arc<Model>,
    pub problem: Problem,
}

impl ScenarioProblem {
    pub fn build(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let model = Arc::new(Model::new(scenario));
        let blocks = scenario_blocks(&model)?;
        let pinned = pinned_indices(&model);
        let problem = Problem {
            variable_count: model.layout.total_count(),
            blocks,
            pinned,
        };
        Ok(Self { model, problem })
    }

    pub fn layout(&self) -> &VariableLayout {
        &self.model.layout
    }

    pub fn scenario(&self) -> &Scenario {
        &self.model.scenario
    }
}

/// Object start and goal poses, and the initial joint values of
/// interactive manipulators, are fixed rather than penalized.
pub fn pinned_indices(model: &Model) -> Vec<usize> {
    let layout = &model.layout;
    let last = layout.nodes() - 1;
    let mut out = Vec::new();
    for o in &layout.objects {
        for node in [0, last] {
            out.extend((0..6).map(|c| o.spline.value_index(node, c)));
        }
    }
    for (i, r) in model.scenario.robots.iter().enumerate() {
        if r.is_interactive() {
            let b = &layout.robots[i];
            out.extend((0..b.dim).map(|c| b.value_index(0, c)));
        }
    }
    out
}

/// Constraint targets in layout order: objects, then handles that have at
/// least one potential holder.
fn constrained_targets(layout: &VariableLayout, objects: usize) -> Vec<Target> {
    let mut out: Vec<Target> = (0..objects).map(Target::Object).collect();
    for p in &layout.pairs {
        if matches!(p.target, Target::Handle(_)) && !out.contains(&p.target) {
            out.push(p.target);
        }
    }
    out
}

/// Every residual block of a scenario, in declaration order.
pub fn scenario_blocks(model: &Arc<Model>) -> Result<Vec<ResidualBlock>> {
    let s = &model.scenario;
    let layout = &model.layout;
    let pen = &s.penalties;
    let dt = layout.segment_duration();
    let segments = layout.segments;
    let path = path_samples(segments, dt);
    let per_segment = segment_samples(segments, dt);
    let mut blocks = Vec::new();

    for (k, pair) in layout.pairs.iter().enumerate() {
        let label = format!("{}>{}", layout.robot_name(pair.robot), layout.target_name(pair.target));
        match &pair.orientation {
            None => blocks.push(ResidualBlock::new(
                Family::Position,
                format!("position:{label}"),
                PenaltyKind::Equality,
                pen.position,
                path.clone(),
                PositionTerm::new(model.clone(), k),
            )),
            Some(gammas) => {
                for q in 0..4 {
                    blocks.push(ResidualBlock::new(
                        Family::OrientedPosition,
                        format!("oriented_position:{label}:{q}"),
                        PenaltyKind::Equality,
                        pen.position,
                        path.clone(),
                        PositionTerm::oriented(model.clone(), k, q),
                    ));
                }
                blocks.push(ResidualBlock::new(
                    Family::OrientationPartition,
                    format!("orientation_partition:{label}"),
                    PenaltyKind::Equality,
                    pen.orientation_partition,
                    per_segment.clone(),
                    ScheduleSum::partition(gammas.to_vec()),
                ));
            }
        }
    }

    for target in constrained_targets(layout, s.objects.len()) {
        blocks.push(ResidualBlock::new(
            Family::Velocity,
            format!("velocity:{}", layout.target_name(target)),
            PenaltyKind::Equality,
            pen.velocity,
            path.clone(),
            VelocityTerm::new(model.clone(), target),
        ));
    }

    for (j, o) in layout.objects.iter().enumerate() {
        for d in 0..o.rest.len() {
            blocks.push(ResidualBlock::new(
                Family::Rest,
                format!("rest:{}:{d}", layout.object_name(j)),
                PenaltyKind::Equality,
                pen.rest,
                path.clone(),
                RestTerm::new(model.clone(), j, d),
            ));
        }
        blocks.push(ResidualBlock::new(
            Family::RestPartition,
            format!("rest_partition:{}", layout.object_name(j)),
            PenaltyKind::Equality,
            pen.rest_partition,
            per_segment.clone(),
            ScheduleSum::partition(o.rest.clone()),
        ));
    }

    for i in 0..s.robots.len() {
        let weights: Vec<_> = layout.pairs_of_robot(i).map(|p| p.weight).collect();
        if !weights.is_empty() {
            blocks.push(ResidualBlock::new(
                Family::Capacity,
                format!("capacity:{}", layout.robot_name(i)),
                PenaltyKind::Inequality,
                pen.capacity,
                per_segment.clone(),
                ScheduleSum::capacity(weights),
            ));
        }
    }

    let collision = collision_samples(segments, dt);
    for (a, b) in active_pairs(model)? {
        let term = CollisionTerm::new(model.clone(), a, b);
        blocks.push(ResidualBlock::new(
            Family::Collision,
            format!("collision:{}", term.label()),
            PenaltyKind::Inequality,
            pen.collision,
            collision.clone(),
            term,
        ));
    }

    let once = vec![Sample {
        time: 0.0,
        point: SegmentPoint { segment: 0, u: 0.0 },
        scale: 1.0,
    }];
    for (i, r) in s.robots.iter().enumerate() {
        let b = &layout.robots[i];
        let limits = &r.chain.joints;
        let entries = (0..layout.nodes())
            .flat_map(|n| (0..b.dim).map(move |c| (n, c)))
            .map(|(n, c)| (b.value_index(n, c), limits[c].limits[0], limits[c].limits[1]))
            .collect();
        blocks.push(ResidualBlock::new(
            Family::Bounds,
            format!("bounds:{}", layout.robot_name(i)),
            PenaltyKind::Inequality,
            pen.bounds,
            once.clone(),
            Bounds { entries },
        ));
    }
    let mut grasp = Vec::new();
    let mut schedules = Vec::new();
    for p in &layout.pairs {
        let [lo, hi] = match p.target {
            Target::Object(j) => s.objects[j].delta_limits(),
            Target::Handle(h) => {
                let half = s.robots[h].interactive.as_ref().map_or(0.0, |i| 0.5 * i.handle_length);
                [-half, half]
            }
        };
        grasp.push((p.delta_index(), lo, hi));
    }
    for block in layout.schedule_blocks() {
        schedules.extend(block.range().map(|i| (i, 0.0, 1.0)));
    }
    for (name, entries) in [("grasp", grasp), ("schedules", schedules)] {
        if !entries.is_empty() {
            blocks.push(ResidualBlock::new(
                Family::Bounds,
                format!("bounds:{name}"),
                PenaltyKind::Inequality,
                pen.bounds,
                once.clone(),
                Bounds { entries },
            ));
        }
    }

    if let Some(limits) = &s.extensions.weight_rate_limits {
        if segments > 1 {
            let knots = boundary_samples(segments, dt);
            for pair in &layout.pairs {
                blocks.push(ResidualBlock::new(
                    Family::WeightRate,
                    format!(
                        "weight_rate:{}>{}",
                        layout.robot_name(pair.robot),
                        layout.target_name(pair.target)
                    ),
                    PenaltyKind::Inequality,
                    pen.weight_rate,
                    knots.clone(),
                    WeightRate {
                        block: pair.weight,
                        upper: limits.upper,
                        lower: limits.lower,
                        segment_duration: dt,
                    },
                ));
            }
        }
    }

    blocks.extend(objective_blocks(model));
    Ok(blocks)
}
