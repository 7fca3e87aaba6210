//! Grasp coupling and resting terms: position, oriented position, velocity
//! and rest constraints.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::geometry::grasp::grasp_local;
use crate::geometry::pose::{right_jacobian_inv, rotation_log};
use crate::geometry::Vec3;
use crate::scene::Target;

use super::jet::{object_jet, robot_jet, target_jet, RobotFrame};
use super::{Model, RowSink, Sample, Term};

/// `s · [f_p − g_p ; log(R_gᵀ R_f)]` for one manipulator-target pair, where
/// `s` is the association weight, or the weight times one orientation
/// weight when `orientation` is set.
pub struct PositionTerm {
    model: Arc<Model>,
    pair: usize,
    orientation: Option<usize>,
}

impl PositionTerm {
    pub fn new(model: Arc<Model>, pair: usize) -> Self {
        Self {
            model,
            pair,
            orientation: None,
        }
    }

    pub fn oriented(model: Arc<Model>, pair: usize, k: usize) -> Self {
        Self {
            model,
            pair,
            orientation: Some(k),
        }
    }
}

impl Term for PositionTerm {
    fn rows(&self) -> usize {
        6
    }

    fn evaluate(&self, x: &[f64], at: &Sample, out: &mut RowSink<'_>) {
        let m = &*self.model;
        let pair = &m.layout.pairs[self.pair];
        let seg = at.point.segment;
        let w_idx = pair.weight.index(seg);
        let w = x[w_idx];
        let gamma = self.orientation.map(|k| {
            let blocks = pair.orientation.as_ref().expect("orientation weights enabled");
            let idx = blocks[k].index(seg);
            (idx, x[idx])
        });
        let scale = w * gamma.map_or(1.0, |(_, g)| g);

        let ee = robot_jet(m, x, pair.robot, RobotFrame::Tool, at.point);
        let obj = target_jet(m, x, pair.target, at.point);
        let angle = x[pair.theta_index()] + self.orientation.unwrap_or(0) as f64 * FRAC_PI_2;
        let local = grasp_local(x[pair.delta_index()], angle, &m.gripper_offsets[pair.robot]);
        let g_p = obj.position + obj.rotation * local.translation.vector;
        let r_g = obj.rotation * local.rotation.matrix();
        let dp = ee.position - g_p;
        let phi = rotation_log(&(r_g.transpose() * ee.rotation));
        let map = right_jacobian_inv(&phi) * ee.rotation.transpose();
        for k in 0..3 {
            out.set(k, scale * dp[k]);
            out.set(3 + k, scale * phi[k]);
        }

        let inner = gamma.map_or(1.0, |(_, g)| g);
        out.add3(0, w_idx, &(dp * inner));
        out.add3(3, w_idx, &(phi * inner));
        if let Some((g_idx, _)) = gamma {
            out.add3(0, g_idx, &(dp * w));
            out.add3(3, g_idx, &(phi * w));
        }
        for p in &ee.partials {
            out.add3(0, p.index, &(p.position * scale));
            out.add3(3, p.index, &(map * p.rotation * scale));
        }
        let arm = g_p - obj.position;
        for p in &obj.partials {
            let dg = p.position + p.rotation.cross(&arm);
            out.add3(0, p.index, &(-dg * scale));
            out.add3(3, p.index, &(-(map * p.rotation) * scale));
        }
        let axis = obj.rotation * Vec3::z();
        out.add3(0, pair.delta_index(), &(-axis * scale));
        out.add3(3, pair.delta_index(), &Vec3::zeros());
        out.add3(0, pair.theta_index(), &(-axis.cross(&arm) * scale));
        out.add3(3, pair.theta_index(), &(-(map * axis) * scale));
    }
}

/// Target twist minus the weighted sum of the holders' tool twists, each
/// transported to the target origin:
/// `[v_o − Σ w_i (v_i + ω_i × (p_o − p_i)) ; ω_o − Σ w_i ω_i]`.
pub struct VelocityTerm {
    model: Arc<Model>,
    target: Target,
    holders: Vec<usize>,
}

impl VelocityTerm {
    pub fn new(model: Arc<Model>, target: Target) -> Self {
        let holders = model
            .layout
            .pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.target == target)
            .map(|(k, _)| k)
            .collect();
        Self { model, target, holders }
    }
}

impl Term for VelocityTerm {
    fn rows(&self) -> usize {
        6
    }

    fn evaluate(&self, x: &[f64], at: &Sample, out: &mut RowSink<'_>) {
        let m = &*self.model;
        let obj = target_jet(m, x, self.target, at.point);
        let mut lin = obj.linear_velocity;
        let mut ang = obj.angular_velocity;
        let mut weighted_spin = Vec3::zeros();
        for &k in &self.holders {
            let pair = &m.layout.pairs[k];
            let w_idx = pair.weight.index(at.point.segment);
            let w = x[w_idx];
            let ee = robot_jet(m, x, pair.robot, RobotFrame::Tool, at.point);
            let lever = obj.position - ee.position;
            let transported = ee.linear_velocity + ee.angular_velocity.cross(&lever);
            lin -= transported * w;
            ang -= ee.angular_velocity * w;
            weighted_spin += ee.angular_velocity * w;
            out.add3(0, w_idx, &-transported);
            out.add3(3, w_idx, &-ee.angular_velocity);
            for p in &ee.partials {
                let d = p.linear_velocity + p.angular_velocity.cross(&lever) - ee.angular_velocity.cross(&p.position);
                out.add3(0, p.index, &(-d * w));
                out.add3(3, p.index, &(-p.angular_velocity * w));
            }
        }
        for p in &obj.partials {
            out.add3(0, p.index, &(p.linear_velocity - weighted_spin.cross(&p.position)));
            out.add3(3, p.index, &p.angular_velocity);
        }
        for k in 0..3 {
            out.set(k, lin[k]);
            out.set(3 + k, ang[k]);
        }
    }
}

/// `ŵ · r_d · [up · (R a_d) − 1 ; z − elevation_d]` with
/// `ŵ = 1 − Σ_i w_ij`, evaluated on the object pose.
pub struct RestTerm {
    model: Arc<Model>,
    object: usize,
    rest: usize,
    holders: Vec<usize>,
}

impl RestTerm {
    pub fn new(model: Arc<Model>, object: usize, rest: usize) -> Self {
        let holders = model
            .layout
            .pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.target == Target::Object(object))
            .map(|(k, _)| k)
            .collect();
        Self {
            model,
            object,
            rest,
            holders,
        }
    }
}

impl Term for RestTerm {
    fn rows(&self) -> usize {
        2
    }

    fn evaluate(&self, x: &[f64], at: &Sample, out: &mut RowSink<'_>) {
        let m = &*self.model;
        let seg = at.point.segment;
        let pose = &m.rest_poses[self.object][self.rest];
        let obj = object_jet(m, x, self.object, at.point);
        let up = Vec3::z();
        let face = obj.rotation * Vec3::from(pose.axis);
        let phi = [up.dot(&face) - 1.0, obj.position.z - pose.elevation];
        let free = 1.0
            - self
                .holders
                .iter()
                .map(|&k| x[m.layout.pairs[k].weight.index(seg)])
                .sum::<f64>();
        let r_idx = m.layout.objects[self.object].rest[self.rest].index(seg);
        let r = x[r_idx];
        out.set(0, free * r * phi[0]);
        out.set(1, free * r * phi[1]);
        let tilt = face.cross(&up);
        for p in &obj.partials {
            out.add(0, p.index, free * r * p.rotation.dot(&tilt));
            out.add(1, p.index, free * r * p.position.z);
        }
        for &k in &self.holders {
            let w_idx = m.layout.pairs[k].weight.index(seg);
            out.add(0, w_idx, -r * phi[0]);
            out.add(1, w_idx, -r * phi[1]);
        }
        out.add(0, r_idx, free * phi[0]);
        out.add(1, r_idx, free * phi[1]);
    }
}
