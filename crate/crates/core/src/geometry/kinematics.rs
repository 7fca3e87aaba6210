//! Serial-chain forward kinematics with exact first derivatives and the
//! velocity-level second-order terms needed by twist constraints.

use nalgebra::Matrix6xX;
use serde::{Deserialize, Serialize};

use super::collision::CollisionPrimitive;
use super::pose::{euler_rate_matrix, rot_axis, Mat3, Pose, Transform, Vec3};
use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointKind {
    Revolute,
    Prismatic,
}

/// One actuated joint. `origin` is the fixed transform from the parent link
/// to the joint frame; the joint then rotates about (or slides along) `axis`
/// expressed in that joint frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Joint {
    pub kind: JointKind,
    pub axis: [f64; 3],
    #[serde(default)]
    pub origin: Pose,
    pub limits: [f64; 2],
}

impl Joint {
    pub fn revolute(axis: [f64; 3], origin: Pose, limits: [f64; 2]) -> Self {
        Self {
            kind: JointKind::Revolute,
            axis,
            origin,
            limits,
        }
    }

    pub fn prismatic(axis: [f64; 3], origin: Pose, limits: [f64; 2]) -> Self {
        Self {
            kind: JointKind::Prismatic,
            axis,
            origin,
            limits,
        }
    }

    pub fn axis(&self) -> Vec3 {
        Vec3::from(self.axis)
    }

    fn motion(&self, q: f64) -> Transform {
        let axis = self.axis();
        match self.kind {
            JointKind::Revolute => Transform::from_parts(
                Vec3::zeros().into(),
                nalgebra::Rotation3::from_matrix_unchecked(rot_axis(&axis, q)),
            ),
            JointKind::Prismatic => Transform::from_parts((axis * q).into(), Default::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let norm = self.axis().norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidScenario(format!(
                "joint axis must be a unit vector (norm {norm})"
            )));
        }
        if !(self.limits[0] <= self.limits[1]) {
            return Err(Error::InvalidScenario(format!(
                "joint limits must satisfy min <= max, got {:?}",
                self.limits
            )));
        }
        Ok(())
    }
}

/// A collision primitive rigidly attached to the frame of `link` (the frame
/// after joint `link` has moved).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkPrimitive {
    pub link: usize,
    pub primitive: CollisionPrimitive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinematicChain {
    pub joints: Vec<Joint>,
    #[serde(default)]
    pub tool: Pose,
    #[serde(default)]
    pub collision_bodies: Vec<LinkPrimitive>,
}

/// World-frame quantities of a chain at one configuration.
#[derive(Debug, Clone)]
pub struct ChainFrames {
    /// Frame of each link after its joint motion.
    pub links: Vec<Transform>,
    /// World direction of every joint axis.
    pub axes: Vec<Vec3>,
    /// A world point on every joint axis (the joint frame origin).
    pub anchors: Vec<Vec3>,
    pub kinds: Vec<JointKind>,
    pub tool: Transform,
}

impl ChainFrames {
    pub fn dof(&self) -> usize {
        self.axes.len()
    }

    /// Velocity of a point attached distal to joint `k` per unit joint rate.
    pub fn point_rate(&self, k: usize, point: &Vec3) -> Vec3 {
        match self.kinds[k] {
            JointKind::Revolute => self.axes[k].cross(&(point - self.anchors[k])),
            JointKind::Prismatic => self.axes[k],
        }
    }

    /// Rate of a free vector attached distal to joint `k` per unit joint rate.
    pub fn vector_rate(&self, k: usize, v: &Vec3) -> Vec3 {
        match self.kinds[k] {
            JointKind::Revolute => self.axes[k].cross(v),
            JointKind::Prismatic => Vec3::zeros(),
        }
    }

    /// Angular velocity per unit rate of joint `k`.
    pub fn angular_rate(&self, k: usize) -> Vec3 {
        match self.kinds[k] {
            JointKind::Revolute => self.axes[k],
            JointKind::Prismatic => Vec3::zeros(),
        }
    }

    /// Derivatives of the linear and angular Jacobian columns of joint `j`
    /// (for the point `p` moved by joints `0..=last`) with respect to `q_k`.
    fn column_partial(&self, j: usize, k: usize, p: &Vec3) -> (Vec3, Vec3) {
        let (da, do_) = if k < j {
            (self.vector_rate(k, &self.axes[j]), self.point_rate(k, &self.anchors[j]))
        } else {
            (Vec3::zeros(), Vec3::zeros())
        };
        let dp = self.point_rate(k, p);
        match self.kinds[j] {
            JointKind::Revolute => (da.cross(&(p - self.anchors[j])) + self.axes[j].cross(&(dp - do_)), da),
            JointKind::Prismatic => (da, Vec3::zeros()),
        }
    }
}

/// Tool frame with velocity and every first derivative with respect to the
/// joint positions and joint rates.
#[derive(Debug, Clone)]
pub struct ToolJet {
    pub position: Vec3,
    pub rotation: Mat3,
    pub linear_velocity: Vec3,
    pub angular_velocity: Vec3,
    /// Per joint: (d position, d rotation as world angular increment,
    /// d linear velocity, d angular velocity) with respect to `q_k`.
    pub d_q: Vec<[Vec3; 4]>,
    /// Per joint: (d linear velocity, d angular velocity) with respect to
    /// `q̇_k`; equal to the geometric Jacobian column.
    pub d_qdot: Vec<[Vec3; 2]>,
}

impl KinematicChain {
    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn validate(&self) -> Result<()> {
        for j in &self.joints {
            j.validate()?;
        }
        for lp in &self.collision_bodies {
            if lp.link >= self.dof() {
                return Err(Error::InvalidScenario(format!(
                    "collision body attached to link {} but chain has {} links",
                    lp.link,
                    self.dof()
                )));
            }
            lp.primitive.validate()?;
        }
        Ok(())
    }

    pub fn frames(&self, q: &[f64]) -> Result<ChainFrames> {
        check_dim("joint vector", self.dof(), q.len())?;
        let n = self.dof();
        let mut links = Vec::with_capacity(n);
        let mut axes = Vec::with_capacity(n);
        let mut anchors = Vec::with_capacity(n);
        let mut kinds = Vec::with_capacity(n);
        let mut current = Transform::identity();
        for (joint, &qk) in self.joints.iter().zip(q) {
            let before = current * joint.origin.to_transform();
            axes.push(before.rotation * joint.axis());
            anchors.push(before.translation.vector);
            kinds.push(joint.kind);
            current = before * joint.motion(qk);
            links.push(current);
        }
        let tool = current * self.tool.to_transform();
        Ok(ChainFrames {
            links,
            axes,
            anchors,
            kinds,
            tool,
        })
    }

    pub fn forward_kinematics(&self, q: &[f64]) -> Result<Pose> {
        Ok(Pose::from_transform(&self.frames(q)?.tool))
    }

    /// Geometric (twist) Jacobian of the tool frame: rows are linear
    /// velocity then world angular velocity.
    pub fn tool_twist_jacobian(&self, q: &[f64]) -> Result<Matrix6xX<f64>> {
        let frames = self.frames(q)?;
        let p = frames.tool.translation.vector;
        let mut jac = Matrix6xX::zeros(self.dof());
        for k in 0..self.dof() {
            let lin = frames.point_rate(k, &p);
            let ang = frames.angular_rate(k);
            jac.fixed_view_mut::<3, 1>(0, k).copy_from(&lin);
            jac.fixed_view_mut::<3, 1>(3, k).copy_from(&ang);
        }
        Ok(jac)
    }

    /// Jacobian of the tool [`Pose`] parameters (position, Euler angles).
    /// The Euler rows are singular at gimbal lock.
    pub fn fk_jacobian(&self, q: &[f64]) -> Result<Matrix6xX<f64>> {
        let mut jac = self.tool_twist_jacobian(q)?;
        let pose = self.forward_kinematics(q)?;
        let e_inv = euler_rate_matrix(&pose.euler())
            .try_inverse()
            .ok_or_else(|| Error::OutOfRange {
                what: "tool orientation",
                detail: "Euler rates undefined at gimbal lock".into(),
            })?;
        for k in 0..self.dof() {
            let ang: Vec3 = jac.fixed_view::<3, 1>(3, k).into_owned();
            jac.fixed_view_mut::<3, 1>(3, k).copy_from(&(e_inv * ang));
        }
        Ok(jac)
    }

    pub fn tool_jet(&self, q: &[f64], qdot: &[f64]) -> Result<ToolJet> {
        check_dim("joint rate vector", self.dof(), qdot.len())?;
        let frames = self.frames(q)?;
        Ok(tool_jet_from_frames(&frames, qdot))
    }
}

pub fn tool_jet_from_frames(frames: &ChainFrames, qdot: &[f64]) -> ToolJet {
    frame_jet(frames, &frames.tool, qdot)
}

/// Jet of any frame rigidly attached to the last link.
pub fn frame_jet(frames: &ChainFrames, frame: &Transform, qdot: &[f64]) -> ToolJet {
    let n = frames.dof();
    let p = frame.translation.vector;
    let cols: Vec<(Vec3, Vec3)> = (0..n)
        .map(|k| (frames.point_rate(k, &p), frames.angular_rate(k)))
        .collect();
    let mut lin_vel = Vec3::zeros();
    let mut ang_vel = Vec3::zeros();
    for (k, (l, a)) in cols.iter().enumerate() {
        lin_vel += l * qdot[k];
        ang_vel += a * qdot[k];
    }
    let mut d_q = Vec::with_capacity(n);
    for k in 0..n {
        let mut dv = Vec3::zeros();
        let mut dw = Vec3::zeros();
        for (j, &rate) in qdot.iter().enumerate() {
            if rate == 0.0 {
                continue;
            }
            let (dl, da) = frames.column_partial(j, k, &p);
            dv += dl * rate;
            dw += da * rate;
        }
        d_q.push([cols[k].0, cols[k].1, dv, dw]);
    }
    ToolJet {
        position: p,
        rotation: *frame.rotation.matrix(),
        linear_velocity: lin_vel,
        angular_velocity: ang_vel,
        d_q,
        d_qdot: cols.into_iter().map(|(l, a)| [l, a]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix4;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn planar_two_link() -> KinematicChain {
        KinematicChain {
            joints: vec![
                Joint::revolute([0.0, 0.0, 1.0], Pose::identity(), [-PI, PI]),
                Joint::revolute([0.0, 0.0, 1.0], Pose::from_translation(1.0, 0.0, 0.0), [-PI, PI]),
            ],
            tool: Pose::from_translation(1.0, 0.0, 0.0),
            collision_bodies: vec![],
        }
    }

    pub(crate) fn random_chain(rng: &mut ChaCha8Rng, n: usize) -> KinematicChain {
        let joints = (0..n)
            .map(|k| {
                let axis = Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
                .normalize();
                let origin = Pose::new(
                    Vec3::new(
                        rng.random_range(-0.3..0.3),
                        rng.random_range(-0.3..0.3),
                        rng.random_range(0.0..0.4),
                    ),
                    Vec3::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    ),
                );
                let kind = if k == 2 {
                    JointKind::Prismatic
                } else {
                    JointKind::Revolute
                };
                Joint {
                    kind,
                    axis: axis.into(),
                    origin,
                    limits: [-PI, PI],
                }
            })
            .collect();
        KinematicChain {
            joints,
            tool: Pose::new(Vec3::new(0.05, 0.0, 0.1), Vec3::new(0.1, 0.2, 0.3)),
            collision_bodies: vec![],
        }
    }

    fn homogeneous(rot: Mat3, t: Vec3) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&rot);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
        m
    }

    // Independent oracle: plain 4x4 products, joint by joint.
    fn fk_oracle(chain: &KinematicChain, q: &[f64]) -> Matrix4<f64> {
        let mut t = Matrix4::<f64>::identity();
        for (j, &qk) in chain.joints.iter().zip(q) {
            t *= homogeneous(j.origin.rotation(), j.origin.translation());
            let a = j.axis();
            t *= match j.kind {
                JointKind::Revolute => {
                    let k = super::super::pose::skew(&a);
                    homogeneous(
                        Mat3::identity() + k * qk.sin() + k * k * (1.0 - qk.cos()),
                        Vec3::zeros(),
                    )
                }
                JointKind::Prismatic => homogeneous(Mat3::identity(), a * qk),
            };
        }
        t * homogeneous(chain.tool.rotation(), chain.tool.translation())
    }

    #[test]
    fn planar_arm_zero_configuration() {
        let pose = planar_two_link().forward_kinematics(&[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(pose.translation(), Vec3::new(2.0, 0.0, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(pose.euler(), Vec3::zeros(), epsilon = 1e-15);
    }

    #[test]
    fn planar_arm_quarter_turn() {
        let pose = planar_two_link().forward_kinematics(&[PI / 2.0, 0.0]).unwrap();
        assert_abs_diff_eq!(pose.translation(), Vec3::new(0.0, 2.0, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(pose.euler(), Vec3::new(0.0, 0.0, PI / 2.0), epsilon = 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let err = planar_two_link().forward_kinematics(&[0.0]).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                actual: 1,
                ..
            }
        ));
    }

    #[test]
    fn six_joint_chain_matches_matrix_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let chain = random_chain(&mut rng, 6);
            let q: Vec<f64> = (0..6).map(|_| rng.random_range(-PI..PI)).collect();
            let ours = chain.frames(&q).unwrap().tool.to_homogeneous();
            let oracle = fk_oracle(&chain, &q);
            assert!((ours - oracle).abs().max() <= 1e-12);
            let pose = chain.forward_kinematics(&q).unwrap();
            assert!((pose.to_transform().to_homogeneous() - oracle).abs().max() <= 1e-12);
        }
    }

    #[test]
    fn identity_fixed_joint_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let chain = random_chain(&mut rng, 4);
        let q = [0.3, -0.2, 0.1, 0.9];
        let mut extended = chain.clone();
        // A prismatic joint locked at zero with identity origin acts as an identity fixed joint.
        extended
            .joints
            .push(Joint::prismatic([1.0, 0.0, 0.0], Pose::identity(), [0.0, 0.0]));
        let a = chain.forward_kinematics(&q).unwrap();
        let b = extended.forward_kinematics(&[q[0], q[1], q[2], q[3], 0.0]).unwrap();
        for (x, y) in a.to_array().iter().zip(b.to_array()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn single_link_jacobian_is_circle_tangent() {
        let chain = KinematicChain {
            joints: vec![Joint::revolute([0.0, 0.0, 1.0], Pose::identity(), [-PI, PI])],
            tool: Pose::from_translation(1.0, 0.0, 0.0),
            collision_bodies: vec![],
        };
        let j = chain.fk_jacobian(&[0.0]).unwrap();
        assert_abs_diff_eq!(j[(0, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j[(1, 0)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn prismatic_column_is_world_axis() {
        let chain = KinematicChain {
            joints: vec![
                Joint::revolute([0.0, 0.0, 1.0], Pose::identity(), [-PI, PI]),
                Joint::prismatic([1.0, 0.0, 0.0], Pose::from_translation(0.5, 0.0, 0.0), [0.0, 1.0]),
            ],
            tool: Pose::identity(),
            collision_bodies: vec![],
        };
        let j = chain.fk_jacobian(&[0.4, 0.2]).unwrap();
        assert_abs_diff_eq!(j[(0, 1)], 0.4f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(j[(1, 1)], 0.4f64.sin(), epsilon = 1e-15);
        for r in 2..6 {
            assert_abs_diff_eq!(j[(r, 1)], 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn fk_jacobian_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = 1e-6;
        for _ in 0..3 {
            let chain = random_chain(&mut rng, 6);
            for _ in 0..10 {
                let q: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
                let jac = chain.fk_jacobian(&q).unwrap();
                let scale = jac.abs().max().max(1.0);
                for k in 0..6 {
                    let mut qp = q.clone();
                    qp[k] += h;
                    let mut qm = q.clone();
                    qm[k] -= h;
                    let fp = chain.forward_kinematics(&qp).unwrap().to_array();
                    let fm = chain.forward_kinematics(&qm).unwrap().to_array();
                    for r in 0..6 {
                        let fd = (fp[r] - fm[r]) / (2.0 * h);
                        assert!(
                            (fd - jac[(r, k)]).abs() / scale <= 1e-6,
                            "row {r} col {k}: fd {fd} vs {}",
                            jac[(r, k)]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn tool_jet_second_order_terms_match_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let chain = random_chain(&mut rng, 5);
        let q: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let qdot: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let jet = chain.tool_jet(&q, &qdot).unwrap();
        let h = 1e-6;
        for k in 0..5 {
            let mut qp = q.clone();
            qp[k] += h;
            let mut qm = q.clone();
            qm[k] -= h;
            let a = chain.tool_jet(&qp, &qdot).unwrap();
            let b = chain.tool_jet(&qm, &qdot).unwrap();
            let dv = (a.linear_velocity - b.linear_velocity) / (2.0 * h);
            let dw = (a.angular_velocity - b.angular_velocity) / (2.0 * h);
            let dp = (a.position - b.position) / (2.0 * h);
            assert_abs_diff_eq!(dv, jet.d_q[k][2], epsilon = 1e-7);
            assert_abs_diff_eq!(dw, jet.d_q[k][3], epsilon = 1e-7);
            assert_abs_diff_eq!(dp, jet.d_q[k][0], epsilon = 1e-7);
        }
    }
}
