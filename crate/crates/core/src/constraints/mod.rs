//! Residual blocks: constraint families with exact Jacobians, their sample
//! rules and the penalty transform applied during assembly.

pub mod collision;
pub mod jet;
pub mod kinematic;
pub mod manifold;
pub mod model;
pub mod sampling;
pub mod schedule;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::trajectory::SegmentPoint;

pub use model::Model;
pub use sampling::{collision_samples, path_samples, quadrature_samples, segment_samples};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Position,
    OrientedPosition,
    OrientationPartition,
    Velocity,
    Rest,
    RestPartition,
    Capacity,
    Collision,
    Bounds,
    WeightRate,
    JointVelocity,
    JointAcceleration,
    EndEffectorVelocity,
    ObjectAcceleration,
}

impl Family {
    pub const ALL: [Family; 14] = [
        Family::Position,
        Family::OrientedPosition,
        Family::OrientationPartition,
        Family::Velocity,
        Family::Rest,
        Family::RestPartition,
        Family::Capacity,
        Family::Collision,
        Family::Bounds,
        Family::WeightRate,
        Family::JointVelocity,
        Family::JointAcceleration,
        Family::EndEffectorVelocity,
        Family::ObjectAcceleration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Position => "position",
            Family::OrientedPosition => "oriented_position",
            Family::OrientationPartition => "orientation_partition",
            Family::Velocity => "velocity",
            Family::Rest => "rest",
            Family::RestPartition => "rest_partition",
            Family::Capacity => "capacity",
            Family::Collision => "collision",
            Family::Bounds => "bounds",
            Family::WeightRate => "weight_rate",
            Family::JointVelocity => "joint_velocity",
            Family::JointAcceleration => "joint_acceleration",
            Family::EndEffectorVelocity => "end_effector_velocity",
            Family::ObjectAcceleration => "object_acceleration",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyKind {
    /// `c = 0`, residual `√w · c`.
    Equality,
    /// `c ≥ 0`, residual `√w · max(0, −c)^{3/2}`.
    Inequality,
    /// Smoothness term, residual `√(w · sample scale) · c`.
    Objective,
}

/// Where a block is evaluated. `scale` is the quadrature weight of
/// objective samples and 1 elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub point: SegmentPoint,
    pub scale: f64,
}

/// One nonzero of a block Jacobian: row within the block, global column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Output buffer for one sample of a term. Rows are local to the sample.
pub struct RowSink<'a> {
    base: usize,
    values: &'a mut [f64],
    entries: &'a mut Vec<Entry>,
}

impl<'a> RowSink<'a> {
    pub fn new(base: usize, values: &'a mut [f64], entries: &'a mut Vec<Entry>) -> Self {
        Self { base, values, entries }
    }

    pub fn set(&mut self, row: usize, value: f64) {
        self.values[row] = value;
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push(Entry {
            row: self.base + row,
            col,
            value,
        });
    }

    /// Adds `value * v[k]` to rows `row..row + 3`.
    pub fn add3(&mut self, row: usize, col: usize, v: &crate::geometry::Vec3) {
        for k in 0..3 {
            self.add(row + k, col, v[k]);
        }
    }
}

/// A raw constraint or objective quantity with exact first derivatives.
pub trait Term: Send + Sync {
    fn rows(&self) -> usize;

    /// Writes the raw values (before the penalty transform) and every
    /// potentially nonzero derivative at one sample. The set of emitted
    /// columns must not depend on `x`.
    fn evaluate(&self, x: &[f64], at: &Sample, out: &mut RowSink<'_>);
}

/// Raw values and Jacobian triplets of a whole block.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawBlock {
    pub values: Vec<f64>,
    pub entries: Vec<Entry>,
}

#[derive(Clone)]
pub struct ResidualBlock {
    pub family: Family,
    pub label: String,
    pub kind: PenaltyKind,
    pub weight: f64,
    pub samples: Vec<Sample>,
    pub term: Arc<dyn Term>,
}

impl fmt::Debug for ResidualBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResidualBlock")
            .field("family", &self.family)
            .field("label", &self.label)
            .field("kind", &self.kind)
            .field("weight", &self.weight)
            .field("samples", &self.samples.len())
            .field("rows", &self.term.rows())
            .finish()
    }
}

impl ResidualBlock {
    pub fn new(
        family: Family,
        label: impl Into<String>,
        kind: PenaltyKind,
        weight: f64,
        samples: Vec<Sample>,
        term: impl Term + 'static,
    ) -> Self {
        Self {
            family,
            label: label.into(),
            kind,
            weight,
            samples,
            term: Arc::new(term),
        }
    }

    pub fn rows_per_sample(&self) -> usize {
        self.term.rows()
    }

    pub fn row_count(&self) -> usize {
        self.term.rows() * self.samples.len()
    }

    pub fn evaluate(&self, x: &[f64]) -> RawBlock {
        let rows = self.term.rows();
        let mut out = RawBlock {
            values: vec![0.0; self.row_count()],
            entries: Vec::new(),
        };
        for (k, at) in self.samples.iter().enumerate() {
            let values = &mut out.values[k * rows..(k + 1) * rows];
            let mut sink = RowSink::new(k * rows, values, &mut out.entries);
            self.term.evaluate(x, at, &mut sink);
        }
        out
    }

    /// Raw violation of one row: `|c|` for equalities, `max(0, −c)` for
    /// inequalities, zero for objective terms.
    pub fn violation(&self, c: f64) -> f64 {
        match self.kind {
            PenaltyKind::Equality => c.abs(),
            PenaltyKind::Inequality => (-c).max(0.0),
            PenaltyKind::Objective => 0.0,
        }
    }
}

/// Penalty residual and its derivative with respect to the raw value.
/// `weight` already includes any sample scale and penalty continuation.
pub fn penalize(kind: PenaltyKind, weight: f64, c: f64) -> (f64, f64) {
    let s = weight.sqrt();
    match kind {
        PenaltyKind::Equality | PenaltyKind::Objective => (s * c, s),
        PenaltyKind::Inequality => {
            if c >= 0.0 {
                (0.0, 0.0)
            } else {
                let v = -c;
                (s * v * v.sqrt(), -1.5 * s * v.sqrt())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(Family::from_name(f.name()), Some(f));
        }
    }

    #[test]
    fn cubic_penalty_values() {
        assert_eq!(penalize(PenaltyKind::Inequality, 1.0, 0.3), (0.0, 0.0));
        let (r, _) = penalize(PenaltyKind::Inequality, 1.0, -0.3);
        assert_abs_diff_eq!(r, 0.3f64.powf(1.5), epsilon = 1e-15);
        assert_abs_diff_eq!(r, 0.16432, epsilon = 1e-5);
        let (r, _) = penalize(PenaltyKind::Inequality, 1.0, -0.2);
        assert_abs_diff_eq!(r, 0.2f64.powf(1.5), epsilon = 1e-15);
    }

    proptest! {
        // ½ r² = ½ w max(0, −c)³ is C² at the boundary: value, slope and
        // curvature of the squared penalty all vanish as c → 0⁻.
        #[test]
        fn squared_penalty_is_smooth(c in -1.0f64..1.0, w in 0.1f64..100.0) {
            let (r, dr) = penalize(PenaltyKind::Inequality, w, c);
            let v = (-c).max(0.0);
            prop_assert!((0.5 * r * r - 0.5 * w * v.powi(3)).abs() < 1e-12 * (1.0 + w));
            // d(½r²)/dc = r dr = −1.5 w v², d²/dc² = 3 w v.
            prop_assert!((r * dr + 1.5 * w * v * v).abs() < 1e-12 * (1.0 + w));
            prop_assume!(c.abs() > 1e-4);
            let h = 1e-6;
            let fd = (penalize(PenaltyKind::Inequality, w, c + h).0 - penalize(PenaltyKind::Inequality, w, c - h).0) / (2.0 * h);
            prop_assert!((fd - dr).abs() < 1e-4 * w.sqrt());
        }
    }
}
