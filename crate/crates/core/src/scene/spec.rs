//! Scenario description: manipulators, movable objects, static obstacles,
//! the time horizon, objective and penalty weights, extensions and solver
//! settings. All quantities are SI (meters, seconds, radians).

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geometry::{CollisionPrimitive, KinematicChain, Pose, Vec3};
use crate::solver::SolverConfig;

pub const DEFAULT_CUBOID: [f64; 3] = [0.06, 0.06, 0.2];

/// A statically stable placement: the body-frame axis that points up and the
/// resulting height of the object origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestPose {
    pub axis: [f64; 3],
    pub elevation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub name: String,
    #[serde(default = "default_dimensions")]
    pub dimensions: [f64; 3],
    pub start_pose: Pose,
    pub goal_pose: Pose,
    /// Height of the supporting surface used for the derived rest poses.
    #[serde(default)]
    pub support_height: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rest_poses: Option<Vec<RestPose>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collision: Option<Vec<CollisionPrimitive>>,
}

fn default_dimensions() -> [f64; 3] {
    DEFAULT_CUBOID
}

impl ObjectSpec {
    pub fn cuboid(name: &str, start_pose: Pose, goal_pose: Pose) -> Self {
        Self {
            name: name.into(),
            dimensions: DEFAULT_CUBOID,
            start_pose,
            goal_pose,
            support_height: 0.0,
            rest_poses: None,
            collision: None,
        }
    }

    /// Explicit rest poses, or the six face-down placements of the cuboid
    /// in the order `+x, −x, +y, −y, +z, −z` (axis pointing up).
    pub fn rest_poses(&self) -> Vec<RestPose> {
        if let Some(r) = &self.rest_poses {
            return r.clone();
        }
        let mut out = Vec::with_capacity(6);
        for (k, &dim) in self.dimensions.iter().enumerate() {
            for sign in [1.0, -1.0] {
                let mut axis = [0.0; 3];
                axis[k] = sign;
                out.push(RestPose {
                    axis,
                    elevation: self.support_height + 0.5 * dim,
                });
            }
        }
        out
    }

    /// Explicit primitives, or one capsule along the long (z) axis whose
    /// radius is half the larger cross-section side.
    pub fn collision_primitives(&self) -> Vec<CollisionPrimitive> {
        if let Some(c) = &self.collision {
            return c.clone();
        }
        let [dx, dy, dz] = self.dimensions;
        let r = 0.5 * dx.max(dy);
        let half = (0.5 * dz - r).max(0.0);
        vec![CollisionPrimitive::capsule([0.0, 0.0, -half], [0.0, 0.0, half], r)]
    }

    pub fn delta_limits(&self) -> [f64; 2] {
        let half = 0.5 * self.dimensions[2];
        [-half, half]
    }
}

/// Marks a manipulator as an articulated environment object (a drawer): the
/// handle frame, attached to the last link, can be grasped by the other
/// manipulators, and the chain may only move while it is held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractiveSpec {
    pub handle: Pose,
    #[serde(default)]
    pub handle_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManipulatorSpec {
    pub name: String,
    pub chain: KinematicChain,
    pub rest: Vec<f64>,
    /// Fixed transform appended to every grasp frame this manipulator targets.
    #[serde(default)]
    pub gripper_offset: Pose,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interactive: Option<InteractiveSpec>,
}

impl ManipulatorSpec {
    pub fn is_interactive(&self) -> bool {
        self.interactive.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub name: String,
    #[serde(default)]
    pub pose: Pose,
    pub primitive: CollisionPrimitive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Horizon {
    pub duration: f64,
    pub segments: usize,
}

impl Horizon {
    pub fn nodes(&self) -> usize {
        self.segments + 1
    }

    pub fn segment_duration(&self) -> f64 {
        self.duration / self.segments as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveWeights {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    /// Per-object acceleration weights; empty disables the term.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub object_accel_weights: Vec<f64>,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            beta1: 1e-2,
            beta2: 1e-3,
            beta3: 1e-2,
            object_accel_weights: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyWeights {
    pub boundary: f64,
    pub position: f64,
    pub velocity: f64,
    pub rest: f64,
    pub rest_partition: f64,
    pub orientation_partition: f64,
    pub capacity: f64,
    pub collision: f64,
    pub bounds: f64,
    pub weight_rate: f64,
}

impl PenaltyWeights {
    /// The same weight for every family.
    pub fn uniform(weight: f64) -> Self {
        Self {
            boundary: weight,
            position: weight,
            velocity: weight,
            rest: weight,
            rest_partition: weight,
            orientation_partition: weight,
            capacity: weight,
            collision: weight,
            bounds: weight,
            weight_rate: weight,
        }
    }
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        Self::uniform(1e3)
    }
}

/// Limits on the rate of change of association weights, per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateLimits {
    pub upper: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Extensions {
    /// Enables the per-orientation grasp weights.
    pub orientation_weights: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_rate_limits: Option<RateLimits>,
    /// Explicit collision pairs by body name (`robot:link`, object or
    /// obstacle name). `None` selects the default pair set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collision_pairs: Option<Vec<[String; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub robots: Vec<ManipulatorSpec>,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    pub horizon: Horizon,
    #[serde(default)]
    pub objective: ObjectiveWeights,
    #[serde(default)]
    pub penalties: PenaltyWeights,
    #[serde(default)]
    pub extensions: Extensions,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl Scenario {
    pub fn nodes(&self) -> usize {
        self.horizon.nodes()
    }

    pub fn segments(&self) -> usize {
        self.horizon.segments
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if !(self.horizon.duration > 0.0) {
            return bad(format!(
                "horizon.duration must be positive, got {}",
                self.horizon.duration
            ));
        }
        if self.horizon.segments < 1 {
            return bad("horizon.segments must be at least 1".into());
        }
        let o = &self.objective;
        if [o.beta1, o.beta2, o.beta3].iter().any(|b| !(*b >= 0.0))
            || o.object_accel_weights.iter().any(|b| !(*b >= 0.0))
        {
            return bad("objective weights must be non-negative".into());
        }
        if !o.object_accel_weights.is_empty() && o.object_accel_weights.len() != self.objects.len() {
            return bad(format!(
                "objective.object_accel_weights needs one entry per object ({} given, {} objects)",
                o.object_accel_weights.len(),
                self.objects.len()
            ));
        }
        let p = &self.penalties;
        if [
            p.boundary,
            p.position,
            p.velocity,
            p.rest,
            p.rest_partition,
            p.orientation_partition,
            p.capacity,
            p.collision,
            p.bounds,
            p.weight_rate,
        ]
        .iter()
        .any(|w| !(*w > 0.0))
        {
            return bad("penalty weights must be positive".into());
        }
        if let Some(r) = &self.extensions.weight_rate_limits {
            if !(r.upper > 0.0 && r.lower < 0.0) {
                return bad(format!(
                    "extensions.weight_rate_limits needs upper > 0 > lower, got {r:?}"
                ));
            }
        }
        let mut names = HashSet::new();
        for name in self
            .robots
            .iter()
            .map(|r| &r.name)
            .chain(self.objects.iter().map(|o| &o.name))
            .chain(self.obstacles.iter().map(|o| &o.name))
        {
            if !names.insert(name.as_str()) {
                return bad(format!("duplicate body name `{name}`"));
            }
        }
        for r in &self.robots {
            if r.chain.dof() == 0 {
                return bad(format!("robot `{}` has no joints", r.name));
            }
            r.chain.validate()?;
            if r.rest.len() != r.chain.dof() {
                return bad(format!(
                    "robot `{}` rest configuration has {} entries for {} joints",
                    r.name,
                    r.rest.len(),
                    r.chain.dof()
                ));
            }
            for (q, j) in r.rest.iter().zip(&r.chain.joints) {
                if *q < j.limits[0] || *q > j.limits[1] {
                    return bad(format!("robot `{}` rest configuration outside joint limits", r.name));
                }
            }
        }
        for obj in &self.objects {
            if obj.dimensions.iter().any(|d| !(*d > 0.0)) {
                return bad(format!("object `{}` dimensions must be positive", obj.name));
            }
            let rest = obj.rest_poses();
            if rest.is_empty() {
                return bad(format!("object `{}` needs at least one rest pose", obj.name));
            }
            for r in &rest {
                if (Vec3::from(r.axis).norm() - 1.0).abs() > 1e-9 {
                    return bad(format!("object `{}` rest axis must be a unit vector", obj.name));
                }
            }
            for c in obj.collision_primitives() {
                c.validate()?;
            }
        }
        for obs in &self.obstacles {
            obs.primitive.validate()?;
        }
        self.solver.validate()
    }
}
