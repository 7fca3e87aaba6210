//! Smoothness objective: joint velocity, joint acceleration and tool twist
//! per manipulator, plus optional object accelerations.
//!
//! Each term is sampled at segment starts, midpoints and the horizon end
//! with trapezoid weights, so the squared residual sum approximates the time
//! integral of the squared quantity.

use std::sync::Arc;

use crate::constraints::jet::{robot_jet, RobotFrame};
use crate::constraints::{quadrature_samples, Family, Model, PenaltyKind, ResidualBlock, RowSink, Sample, Term};
use crate::scene::SplineBlock;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Velocity,
    Acceleration,
}

/// First or second time derivative of every coordinate of a spline.
pub struct SplineDerivative {
    pub block: SplineBlock,
    pub order: Order,
    pub segment_duration: f64,
}

impl Term for SplineDerivative {
    fn rows(&self) -> usize {
        self.block.dim
    }

    fn evaluate(&self, x: &[f64], at: &Sample, out: &mut RowSink<'_>) {
        let st = self.block.state(x, at.point, self.segment_duration);
        let (values, coeffs) = match self.order {
            Order::Velocity => (&st.rate, st.weights.velocity),
            Order::Acceleration => (&st.acceleration, st.weights.acceleration),
        };
        for c in 0..self.block.dim {
            out.set(c, values[c]);
            for (a, index) in self.block.nodal_indices(at.point.segment, c).into_iter().enumerate() {
                out.add(c, index, coeffs[a]);
            }
        }
    }
}

/// World-frame tool twist `(v, ω)` of a manipulator.
pub struct ToolTwist {
    model: Arc<Model>,
    robot: usize,
}

impl ToolTwist {
    pub fn new(model: Arc<Model>, robot: usize) -> Self {
        Self { model, robot }
    }
}

impl Term for ToolTwist {
    fn rows(&self) -> usize {
        6
    }

    fn evaluate(&self, x: &[f64], at: &Sample, out: &mut RowSink<'_>) {
        let jet = robot_jet(&self.model, x, self.robot, RobotFrame::Tool, at.point);
        for k in 0..3 {
            out.set(k, jet.linear_velocity[k]);
            out.set(3 + k, jet.angular_velocity[k]);
        }
        for p in &jet.partials {
            out.add3(0, p.index, &p.linear_velocity);
            out.add3(3, p.index, &p.angular_velocity);
        }
    }
}

/// Objective blocks of a scenario; terms with a zero weight are omitted.
pub fn objective_blocks(model: &Arc<Model>) -> Vec<ResidualBlock> {
    let s = &model.scenario;
    let layout = &model.layout;
    let dt = layout.segment_duration();
    let samples = quadrature_samples(layout.segments, dt);
    let mut out = Vec::new();
    for (i, robot) in s.robots.iter().enumerate() {
        let block = layout.robots[i];
        let terms = [
            (Family::JointVelocity, s.objective.beta1, Order::Velocity),
            (Family::JointAcceleration, s.objective.beta2, Order::Acceleration),
        ];
        for (family, beta, order) in terms {
            if beta > 0.0 {
                out.push(ResidualBlock::new(
                    family,
                    format!("{family}:{}", robot.name),
                    PenaltyKind::Objective,
                    beta,
                    samples.clone(),
                    SplineDerivative {
                        block,
                        order,
                        segment_duration: dt,
                    },
                ));
            }
        }
        if s.objective.beta3 > 0.0 {
            out.push(ResidualBlock::new(
                Family::EndEffectorVelocity,
                format!("end_effector_velocity:{}", robot.name),
                PenaltyKind::Objective,
                s.objective.beta3,
                samples.clone(),
                ToolTwist::new(model.clone(), i),
            ));
        }
    }
    for (j, &weight) in s.objective.object_accel_weights.iter().enumerate() {
        if weight > 0.0 {
            out.push(ResidualBlock::new(
                Family::ObjectAcceleration,
                format!("object_acceleration:{}", s.objects[j].name),
                PenaltyKind::Objective,
                weight,
                samples.clone(),
                SplineDerivative {
                    block: layout.objects[j].spline,
                    order: Order::Acceleration,
                    segment_duration: dt,
                },
            ));
        }
    }
    out
}
