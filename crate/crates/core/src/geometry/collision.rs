//! Sphere and capsule primitives and a smooth signed clearance measure.

use serde::{Deserialize, Serialize};

use super::pose::{euler_rate_matrix, Pose, Vec3};
use crate::error::{Error, Result};

/// Regularizer added to the segment-segment normal equations so that
/// parallel overlapping segments still produce a well-defined closest pair.
pub const SEGMENT_REGULARIZER: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveKind {
    Sphere,
    Capsule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionPrimitive {
    pub kind: PrimitiveKind,
    pub radius: f64,
    /// Body-frame segment; both ends coincide for a sphere.
    pub segment: [[f64; 3]; 2],
}

impl CollisionPrimitive {
    pub fn sphere(center: [f64; 3], radius: f64) -> Self {
        Self {
            kind: PrimitiveKind::Sphere,
            radius,
            segment: [center, center],
        }
    }

    pub fn capsule(a: [f64; 3], b: [f64; 3], radius: f64) -> Self {
        Self {
            kind: PrimitiveKind::Capsule,
            radius,
            segment: [a, b],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "collision primitive radius must be positive, got {}",
                self.radius
            )));
        }
        if self.kind == PrimitiveKind::Sphere && self.segment[0] != self.segment[1] {
            return Err(Error::InvalidScenario(
                "sphere primitive must have coincident segment ends".into(),
            ));
        }
        Ok(())
    }

    pub fn local_points(&self) -> [Vec3; 2] {
        [Vec3::from(self.segment[0]), Vec3::from(self.segment[1])]
    }
}

/// Closest-point parameters `(s, t)` of segments `p0 + s (p1 - p0)` and
/// `q0 + t (q1 - q0)`.
pub fn closest_segment_params(p0: &Vec3, p1: &Vec3, q0: &Vec3, q1: &Vec3) -> (f64, f64) {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let tiny = 1e-18;
    if a <= tiny && e <= tiny {
        return (0.0, 0.0);
    }
    if a <= tiny {
        return (0.0, (f / e).clamp(0.0, 1.0));
    }
    let c = d1.dot(&r);
    if e <= tiny {
        return ((-c / a).clamp(0.0, 1.0), 0.0);
    }
    let b = d1.dot(&d2);
    let denom = (a * e - b * b).max(0.0) + SEGMENT_REGULARIZER * a * e;
    let mut s = ((b * f - c * e) / denom).clamp(0.0, 1.0);
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    (s, t)
}

/// Clearance `‖Δ‖² − (r_a + r_b)²` between two world-space capsules together
/// with its gradient with respect to the four segment end points.
#[derive(Debug, Clone, Copy)]
pub struct SegmentClearance {
    pub value: f64,
    pub grad_a: [Vec3; 2],
    pub grad_b: [Vec3; 2],
}

pub fn segment_clearance(a: [Vec3; 2], ra: f64, b: [Vec3; 2], rb: f64) -> SegmentClearance {
    let (s, t) = closest_segment_params(&a[0], &a[1], &b[0], &b[1]);
    let pa = a[0] + (a[1] - a[0]) * s;
    let pb = b[0] + (b[1] - b[0]) * t;
    let d = pa - pb;
    let rsum = ra + rb;
    // Envelope theorem: the closest parameters are held fixed.
    SegmentClearance {
        value: d.norm_squared() - rsum * rsum,
        grad_a: [d * (2.0 * (1.0 - s)), d * (2.0 * s)],
        grad_b: [-d * (2.0 * (1.0 - t)), -d * (2.0 * t)],
    }
}

/// Clearance between two posed primitives with gradients with respect to
/// each pose's six parameters (position, Euler angles).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSq {
    pub value: f64,
    pub grad_a: [f64; 6],
    pub grad_b: [f64; 6],
}

pub fn primitive_distance_sq(
    a: &CollisionPrimitive,
    pose_a: &Pose,
    b: &CollisionPrimitive,
    pose_b: &Pose,
) -> DistanceSq {
    let world = |prim: &CollisionPrimitive, pose: &Pose| {
        let r = pose.rotation();
        let p = pose.translation();
        prim.local_points().map(|x| p + r * x)
    };
    let wa = world(a, pose_a);
    let wb = world(b, pose_b);
    let c = segment_clearance(wa, a.radius, wb, b.radius);
    let pose_grad = |pose: &Pose, pts: &[Vec3; 2], g: &[Vec3; 2]| {
        let e = euler_rate_matrix(&pose.euler());
        let p = pose.translation();
        let gp = g[0] + g[1];
        let mut out = [gp.x, gp.y, gp.z, 0.0, 0.0, 0.0];
        for k in 0..3 {
            let axis: Vec3 = e.column(k).into();
            out[3 + k] = (0..2).map(|i| g[i].dot(&axis.cross(&(pts[i] - p)))).sum();
        }
        out
    };
    DistanceSq {
        value: c.value,
        grad_a: pose_grad(pose_a, &wa, &c.grad_a),
        grad_b: pose_grad(pose_b, &wb, &c.grad_b),
    }
}
