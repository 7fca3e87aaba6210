//! The grasp map: object pose and grasp parameters to the end-effector target.
//!
//! The grasp frame is `object ∘ Rz(θ + kπ/2) ∘ Tz(δ) ∘ tool_offset`, with the
//! object's longitudinal axis as its local z.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use super::pose::{rot_z, Pose, Transform, Vec3};
use crate::error::{Error, Result};

/// Number of distinct grasp orientations around a cuboid's long axis.
pub const CUBOID_GRASP_ORIENTATIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspParams {
    pub delta: f64,
    pub theta: f64,
    pub delta_limits: [f64; 2],
    #[serde(default)]
    pub tool_offset: Pose,
}

impl GraspParams {
    /// Longitudinal limits for a cuboid of the given dimensions; the grasp
    /// may slide along the full half-length of the long (z) axis.
    pub fn for_cuboid(dimensions: [f64; 3], tool_offset: Pose) -> Self {
        let half = 0.5 * dimensions[2];
        Self {
            delta: 0.0,
            theta: 0.0,
            delta_limits: [-half, half],
            tool_offset,
        }
    }
}

/// Grasp frame relative to the object frame.
pub fn grasp_local(delta: f64, angle: f64, tool_offset: &Pose) -> Transform {
    let rotation = nalgebra::Rotation3::from_matrix_unchecked(rot_z(angle));
    let slide = Transform::from_parts(Vec3::new(0.0, 0.0, delta).into(), Default::default());
    Transform::from_parts(Vec3::zeros().into(), rotation) * slide * tool_offset.to_transform()
}

pub fn grasp_pose(object_pose: &Pose, grasp: &GraspParams) -> Pose {
    let t = object_pose.to_transform() * grasp_local(grasp.delta, grasp.theta, &grasp.tool_offset);
    Pose::from_transform(&t)
}

pub fn grasp_pose_oriented(object_pose: &Pose, grasp: &GraspParams, k: usize) -> Result<Pose> {
    if k >= CUBOID_GRASP_ORIENTATIONS {
        return Err(Error::OutOfRange {
            what: "grasp orientation index",
            detail: format!("{k} not in 0..{CUBOID_GRASP_ORIENTATIONS}"),
        });
    }
    let angle = grasp.theta + k as f64 * FRAC_PI_2;
    let t = object_pose.to_transform() * grasp_local(grasp.delta, angle, &grasp.tool_offset);
    Ok(Pose::from_transform(&t))
}
