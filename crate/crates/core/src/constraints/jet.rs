//! Frames with velocities and their first derivatives with respect to the
//! decision variables, chained through the Hermite basis.

use crate::geometry::pose::{euler_rate_matrix, euler_rate_matrix_partials, rotation_from_euler};
use crate::geometry::{frame_jet, ChainFrames, Mat3, Transform, Vec3};
use crate::scene::{SplineBlock, Target};
use crate::trajectory::SegmentPoint;

use super::Model;

/// Derivative of a [`FrameJet`] with respect to one variable. `rotation` is
/// the world-frame angular increment: `dR = [rotation]× R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePartial {
    pub index: usize,
    pub position: Vec3,
    pub rotation: Vec3,
    pub linear_velocity: Vec3,
    pub angular_velocity: Vec3,
}

#[derive(Debug, Clone)]
pub struct FrameJet {
    pub position: Vec3,
    pub rotation: Mat3,
    pub linear_velocity: Vec3,
    pub angular_velocity: Vec3,
    pub partials: Vec<FramePartial>,
}

/// Which frame of a manipulator to differentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RobotFrame {
    Tool,
    Handle,
}

/// Joint values and rates of a manipulator at `at`, with chain frames.
pub struct RobotState {
    pub frames: ChainFrames,
    pub rates: Vec<f64>,
    pub weights: crate::trajectory::HermiteWeights,
}

pub fn robot_state(model: &Model, x: &[f64], robot: usize, at: SegmentPoint) -> RobotState {
    let block = &model.layout.robots[robot];
    let st = block.state(x, at, model.segment_duration());
    let frames = model.scenario.robots[robot]
        .chain
        .frames(&st.value)
        .expect("layout matches chain dimension");
    RobotState {
        frames,
        rates: st.rate,
        weights: st.weights,
    }
}

pub fn robot_jet(model: &Model, x: &[f64], robot: usize, frame: RobotFrame, at: SegmentPoint) -> FrameJet {
    let block = &model.layout.robots[robot];
    let st = robot_state(model, x, robot, at);
    let target: Transform = match frame {
        RobotFrame::Tool => st.frames.tool,
        RobotFrame::Handle => {
            let handle = model.handles[robot].expect("handle frame requested on an interactive robot");
            st.frames.links.last().copied().unwrap_or_else(Transform::identity) * handle
        }
    };
    let jet = frame_jet(&st.frames, &target, &st.rates);
    let h = st.weights;
    let mut partials = Vec::with_capacity(4 * block.dim);
    for c in 0..block.dim {
        let [dp, dr, dv, dw] = jet.d_q[c];
        let [rv, rw] = jet.d_qdot[c];
        for (a, index) in block.nodal_indices(at.segment, c).into_iter().enumerate() {
            partials.push(FramePartial {
                index,
                position: dp * h.value[a],
                rotation: dr * h.value[a],
                linear_velocity: dv * h.value[a] + rv * h.velocity[a],
                angular_velocity: dw * h.value[a] + rw * h.velocity[a],
            });
        }
    }
    FrameJet {
        position: jet.position,
        rotation: jet.rotation,
        linear_velocity: jet.linear_velocity,
        angular_velocity: jet.angular_velocity,
        partials,
    }
}

/// Object frame from its pose spline; linear velocity is the origin
/// velocity and angular velocity is `E(e) ė` in the world frame.
pub fn pose_jet(block: &SplineBlock, x: &[f64], at: SegmentPoint, segment_duration: f64) -> FrameJet {
    let st = block.state(x, at, segment_duration);
    let h = st.weights;
    let e = Vec3::new(st.value[3], st.value[4], st.value[5]);
    let edot = Vec3::new(st.rate[3], st.rate[4], st.rate[5]);
    let em = euler_rate_matrix(&e);
    let dem = euler_rate_matrix_partials(&e);
    let mut partials = Vec::with_capacity(24);
    for c in 0..6 {
        for (a, index) in block.nodal_indices(at.segment, c).into_iter().enumerate() {
            let mut p = FramePartial {
                index,
                position: Vec3::zeros(),
                rotation: Vec3::zeros(),
                linear_velocity: Vec3::zeros(),
                angular_velocity: Vec3::zeros(),
            };
            if c < 3 {
                p.position[c] = h.value[a];
                p.linear_velocity[c] = h.velocity[a];
            } else {
                let k = c - 3;
                let axis: Vec3 = em.column(k).into();
                p.rotation = axis * h.value[a];
                p.angular_velocity = dem[k] * edot * h.value[a] + axis * h.velocity[a];
            }
            partials.push(p);
        }
    }
    FrameJet {
        position: Vec3::new(st.value[0], st.value[1], st.value[2]),
        rotation: rotation_from_euler(&e),
        linear_velocity: Vec3::new(st.rate[0], st.rate[1], st.rate[2]),
        angular_velocity: em * edot,
        partials,
    }
}

pub fn object_jet(model: &Model, x: &[f64], object: usize, at: SegmentPoint) -> FrameJet {
    pose_jet(&model.layout.objects[object].spline, x, at, model.segment_duration())
}

pub fn target_jet(model: &Model, x: &[f64], target: Target, at: SegmentPoint) -> FrameJet {
    match target {
        Target::Object(j) => object_jet(model, x, j, at),
        Target::Handle(h) => robot_jet(model, x, h, RobotFrame::Handle, at),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pose::rotation_log;
    use crate::scene::{initialize, presets};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn perturbed(model: &Model, seed: u64) -> Vec<f64> {
        let mut x = initialize(&model.scenario, &model.layout);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut x {
            *v += rng.random_range(-0.3..0.3);
        }
        x
    }

    /// Central differences of position, rotation (as a world increment) and
    /// both velocities, compared with every analytic partial.
    fn check_jet(f: &dyn Fn(&[f64]) -> FrameJet, x: &[f64]) {
        let jet = f(x);
        let h = 1e-6;
        for p in &jet.partials {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[p.index] += h;
            xm[p.index] -= h;
            let (a, b) = (f(&xp), f(&xm));
            let dpos = (a.position - b.position) / (2.0 * h);
            let drot = rotation_log(&(a.rotation * b.rotation.transpose())) / (2.0 * h);
            let dv = (a.linear_velocity - b.linear_velocity) / (2.0 * h);
            let dw = (a.angular_velocity - b.angular_velocity) / (2.0 * h);
            for (fd, an) in [
                (dpos, p.position),
                (drot, p.rotation),
                (dv, p.linear_velocity),
                (dw, p.angular_velocity),
            ] {
                assert!(
                    (fd - an).norm() <= 1e-6 * (1.0 + fd.norm()),
                    "index {}: fd {fd:?} analytic {an:?}",
                    p.index
                );
            }
        }
    }

    #[test]
    fn robot_tool_jet_matches_differences() {
        let model = Model::new(presets::arm_line(1));
        let x = perturbed(&model, 1);
        for at in [
            SegmentPoint { segment: 2, u: 0.0 },
            SegmentPoint { segment: 4, u: 0.37 },
            SegmentPoint { segment: 8, u: 1.0 },
        ] {
            check_jet(&|x| robot_jet(&model, x, 0, RobotFrame::Tool, at), &x);
        }
    }

    #[test]
    fn handle_jet_matches_differences() {
        let model = Model::new(presets::drawer());
        let x = perturbed(&model, 2);
        let at = SegmentPoint { segment: 3, u: 0.5 };
        check_jet(&|x| robot_jet(&model, x, 1, RobotFrame::Handle, at), &x);
    }

    #[test]
    fn object_jet_matches_differences() {
        let model = Model::new(presets::planar_pick_place());
        let x = perturbed(&model, 3);
        for at in [SegmentPoint { segment: 0, u: 0.0 }, SegmentPoint { segment: 5, u: 0.5 }] {
            check_jet(&|x| object_jet(&model, x, 0, at), &x);
        }
    }
}
