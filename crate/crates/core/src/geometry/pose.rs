//! Rigid poses with a fixed-axis XYZ Euler parameterization, plus the
//! rotation helpers (skew, log map, right-Jacobian inverse, Euler-rate
//! matrices) shared by the kinematics and constraint code.

use nalgebra::{IsometryMatrix3, Matrix3, Rotation3, Translation3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Transform = IsometryMatrix3<f64>;

/// Position plus fixed-axis XYZ Euler angles `(roll, pitch, yaw)`.
///
/// The rotation is `Rz(yaw) * Ry(pitch) * Rx(roll)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: [f64; 3],
    #[serde(default)]
    pub orientation: [f64; 3],
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub const fn identity() -> Self {
        Self {
            position: [0.0; 3],
            orientation: [0.0; 3],
        }
    }

    pub fn new(position: Vec3, orientation: Vec3) -> Self {
        Self {
            position: position.into(),
            orientation: orientation.into(),
        }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self {
            position: [x, y, z],
            orientation: [0.0; 3],
        }
    }

    pub fn from_slice(p: &[f64]) -> Self {
        Self {
            position: [p[0], p[1], p[2]],
            orientation: [p[3], p[4], p[5]],
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        let [x, y, z] = self.position;
        let [a, b, c] = self.orientation;
        [x, y, z, a, b, c]
    }

    pub fn translation(&self) -> Vec3 {
        Vec3::from(self.position)
    }

    pub fn euler(&self) -> Vec3 {
        Vec3::from(self.orientation)
    }

    pub fn rotation(&self) -> Mat3 {
        rotation_from_euler(&self.euler())
    }

    pub fn to_transform(&self) -> Transform {
        Transform::from_parts(
            Translation3::from(self.translation()),
            Rotation3::from_matrix_unchecked(self.rotation()),
        )
    }

    pub fn from_transform(t: &Transform) -> Self {
        Self::new(t.translation.vector, euler_from_rotation(t.rotation.matrix()))
    }
}

pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn rot_x(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rotation about an arbitrary unit axis (Rodrigues).
pub fn rot_axis(axis: &Vec3, angle: f64) -> Mat3 {
    let k = skew(axis);
    let (s, c) = angle.sin_cos();
    Mat3::identity() + k * s + k * k * (1.0 - c)
}

pub fn rotation_from_euler(e: &Vec3) -> Mat3 {
    rot_z(e.z) * rot_y(e.y) * rot_x(e.x)
}

/// Inverse of [`rotation_from_euler`]. At gimbal lock (`pitch = ±π/2`)
/// the roll is set to zero and the remaining freedom goes into yaw.
pub fn euler_from_rotation(r: &Mat3) -> Vec3 {
    let sp = (-r[(2, 0)]).clamp(-1.0, 1.0);
    if sp.abs() > 1.0 - 1e-12 {
        let pitch = FRAC_PI_2.copysign(sp);
        // R = Rz(yaw) Ry(±π/2) with roll = 0; read yaw from the upper-left 2x2 of column 1.
        let yaw = (-r[(0, 1)]).atan2(r[(1, 1)]);
        return Vec3::new(0.0, pitch, yaw);
    }
    let pitch = sp.asin();
    let roll = r[(2, 1)].atan2(r[(2, 2)]);
    let yaw = r[(1, 0)].atan2(r[(0, 0)]);
    Vec3::new(roll, pitch, yaw)
}

/// Maps Euler-angle rates to world-frame angular velocity: `ω = E(e) ė`.
/// Column `k` is also the world rotation axis generated by a unit change of
/// angle `k`.
pub fn euler_rate_matrix(e: &Vec3) -> Mat3 {
    let rz = rot_z(e.z);
    let ry = rot_y(e.y);
    let c0 = rz * ry * Vec3::x();
    let c1 = rz * Vec3::y();
    Mat3::from_columns(&[c0, c1, Vec3::z()])
}

/// Partial derivatives of [`euler_rate_matrix`] with respect to roll, pitch
/// and yaw.
pub fn euler_rate_matrix_partials(e: &Vec3) -> [Mat3; 3] {
    let rz = rot_z(e.z);
    let ry = rot_y(e.y);
    let z = Vec3::z();
    let y = Vec3::y();
    let x = Vec3::x();
    let d_pitch = Mat3::from_columns(&[rz * ry * y.cross(&x), Vec3::zeros(), Vec3::zeros()]);
    let d_yaw = Mat3::from_columns(&[z.cross(&(rz * ry * x)), z.cross(&(rz * y)), Vec3::zeros()]);
    [Mat3::zeros(), d_pitch, d_yaw]
}

/// Rotation vector (axis times angle) of `r`, angle in `[0, π]`.
///
/// The angle comes from `atan2(sin, cos)` so that small rotations keep full
/// relative precision; near `π` the axis is read from the symmetric part.
pub fn rotation_log(r: &Mat3) -> Vec3 {
    let v = 0.5 * Vec3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    let sin = v.norm();
    let cos = 0.5 * (r.trace() - 1.0);
    let theta = sin.atan2(cos);
    if theta < 1e-4 {
        return v * (1.0 + theta * theta / 6.0);
    }
    if cos > -0.9 {
        return v * (theta / sin);
    }
    let b = 0.5 * (r + r.transpose()) - Mat3::identity() * cos;
    let k = (0..3).max_by(|&i, &j| b[(i, i)].total_cmp(&b[(j, j)])).unwrap_or(0);
    let mut axis: Vec3 = b.column(k) / ((1.0 - cos) * b[(k, k)]).sqrt();
    if axis.dot(&v) < 0.0 {
        axis = -axis;
    }
    axis.normalize() * theta
}

/// Inverse of the SO(3) right Jacobian: `log(R exp(δ)) ≈ log(R) + J_r⁻¹(φ) δ`.
pub fn right_jacobian_inv(phi: &Vec3) -> Mat3 {
    let theta2 = phi.norm_squared();
    let k = skew(phi);
    let coeff = if theta2 < 1e-8 {
        1.0 / 12.0 + theta2 / 720.0
    } else {
        let theta = theta2.sqrt();
        1.0 / theta2 - (1.0 + theta.cos()) / (2.0 * theta * theta.sin())
    };
    Mat3::identity() + 0.5 * k + coeff * k * k
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn euler_matches_nalgebra_convention() {
        let e = Vec3::new(0.3, -0.4, 1.2);
        let ours = rotation_from_euler(&e);
        let theirs = Rotation3::from_euler_angles(e.x, e.y, e.z);
        assert_abs_diff_eq!(ours, *theirs.matrix(), epsilon = 1e-14);
    }

    #[test]
    fn gimbal_lock_sets_roll_to_zero() {
        let e = Vec3::new(0.7, PI / 2.0, 0.2);
        let r = rotation_from_euler(&e);
        let back = euler_from_rotation(&r);
        assert_eq!(back.x, 0.0);
        assert_abs_diff_eq!(back.y, PI / 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rotation_from_euler(&back), r, epsilon = 1e-9);
        let r = rotation_from_euler(&Vec3::new(-0.4, -PI / 2.0, 1.0));
        let back = euler_from_rotation(&r);
        assert_eq!(back.x, 0.0);
        assert_abs_diff_eq!(rotation_from_euler(&back), r, epsilon = 1e-9);
    }

    #[test]
    fn euler_rate_columns_generate_rotation_derivative() {
        let e = Vec3::new(0.2, 0.5, -0.9);
        let big_e = euler_rate_matrix(&e);
        let r = rotation_from_euler(&e);
        let h = 1e-6;
        for k in 0..3 {
            let mut ep = e;
            ep[k] += h;
            let mut em = e;
            em[k] -= h;
            let dr = (rotation_from_euler(&ep) - rotation_from_euler(&em)) / (2.0 * h);
            let expected = skew(&big_e.column(k).into()) * r;
            assert_abs_diff_eq!(dr, expected, epsilon = 1e-8);
        }
    }

    #[test]
    fn euler_rate_partials_match_fd() {
        let e = Vec3::new(0.2, 0.5, -0.9);
        let p = euler_rate_matrix_partials(&e);
        let h = 1e-6;
        for k in 0..3 {
            let mut ep = e;
            ep[k] += h;
            let mut em = e;
            em[k] -= h;
            let fd = (euler_rate_matrix(&ep) - euler_rate_matrix(&em)) / (2.0 * h);
            assert_abs_diff_eq!(p[k], fd, epsilon = 1e-8);
        }
    }

    #[test]
    fn right_jacobian_inverse_matches_fd() {
        let phi = Vec3::new(0.4, -0.8, 1.1);
        let r = rot_axis(&phi.normalize(), phi.norm());
        let jinv = right_jacobian_inv(&phi);
        let h = 1e-6;
        for k in 0..3 {
            let mut d = Vec3::zeros();
            d[k] = h;
            let plus = rotation_log(&(r * rot_axis(&Vec3::ith(k, 1.0), h)));
            let minus = rotation_log(&(r * rot_axis(&Vec3::ith(k, 1.0), -h)));
            let fd = (plus - minus) / (2.0 * h);
            assert_abs_diff_eq!(fd, jinv.column(k).into_owned(), epsilon = 1e-7);
        }
        // small-angle branch is continuous with the closed form
        let tiny = Vec3::new(1e-5, 0.0, 0.0);
        let a = right_jacobian_inv(&tiny);
        let b = right_jacobian_inv(&(tiny * 1.0001));
        assert_abs_diff_eq!(a, b, epsilon = 1e-8);
    }

    proptest! {
        #[test]
        fn transform_composition_is_associative(
            a in prop::array::uniform6(-2.0f64..2.0),
            b in prop::array::uniform6(-2.0f64..2.0),
            c in prop::array::uniform6(-2.0f64..2.0),
        ) {
            let (ta, tb, tc) = (
                Pose::from_slice(&a).to_transform(),
                Pose::from_slice(&b).to_transform(),
                Pose::from_slice(&c).to_transform(),
            );
            let left = (ta * tb) * tc;
            let right = ta * (tb * tc);
            prop_assert!((left.to_homogeneous() - right.to_homogeneous()).abs().max() < 1e-12);
        }

        #[test]
        fn euler_round_trip_away_from_gimbal_lock(
            roll in -3.0f64..3.0, pitch in -1.5f64..1.5, yaw in -3.0f64..3.0,
        ) {
            let e = Vec3::new(roll, pitch, yaw);
            let back = euler_from_rotation(&rotation_from_euler(&e));
            prop_assert!((back - e).abs().max() < 1e-9);
        }

        #[test]
        fn log_inverts_axis_angle(
            axis in prop::array::uniform3(-1.0f64..1.0),
            angle in prop_oneof![1e-9f64..1e-3, 1e-3f64..3.0, 3.0f64..(std::f64::consts::PI - 1e-5)],
        ) {
            let a = Vec3::from(axis);
            prop_assume!(a.norm() > 0.1);
            let phi = a.normalize() * angle;
            let r = rot_axis(&a.normalize(), angle);
            let back = rotation_log(&r);
            prop_assert!((back - phi).norm() <= 1e-10 * angle, "angle {angle}: {back:?} vs {phi:?}");
        }
    }
}
