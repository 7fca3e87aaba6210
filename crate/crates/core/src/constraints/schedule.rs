//! Terms on schedule and scalar variables only: partitions, capacity, box
//! bounds and weight-rate limits.

use crate::scene::ScheduleBlock;

use super::{RowSink, Sample, Term};

/// `constant + coefficient · Σ_b b(t)` over a set of schedules.
/// Partitions use `(−1, 1)`, the capacity constraint `(1, −1)`.
pub struct ScheduleSum {
    pub blocks: Vec<ScheduleBlock>,
    pub constant: f64,
    pub coefficient: f64,
}

impl ScheduleSum {
    pub fn partition(blocks: Vec<ScheduleBlock>) -> Self {
        Self {
            blocks,
            constant: -1.0,
            coefficient: 1.0,
        }
    }

    pub fn capacity(blocks: Vec<ScheduleBlock>) -> Self {
        Self {
            blocks,
            constant: 1.0,
            coefficient: -1.0,
        }
    }
}

impl Term for ScheduleSum {
    fn rows(&self) -> usize {
        1
    }

    fn evaluate(&self, x: &[f64], at: &Sample, out: &mut RowSink<'_>) {
        let mut v = self.constant;
        for b in &self.blocks {
            let i = b.index(at.point.segment);
            v += self.coefficient * x[i];
            out.add(0, i, self.coefficient);
        }
        out.set(0, v);
    }
}

/// Box bounds `lo ≤ x_i ≤ hi` as the two inequalities `x_i − lo ≥ 0` and
/// `hi − x_i ≥ 0` per variable. Time-independent; evaluated at one sample.
pub struct Bounds {
    pub entries: Vec<(usize, f64, f64)>,
}

impl Term for Bounds {
    fn rows(&self) -> usize {
        2 * self.entries.len()
    }

    fn evaluate(&self, x: &[f64], _at: &Sample, out: &mut RowSink<'_>) {
        for (k, &(i, lo, hi)) in self.entries.iter().enumerate() {
            out.set(2 * k, x[i] - lo);
            out.set(2 * k + 1, hi - x[i]);
            out.add(2 * k, i, 1.0);
            out.add(2 * k + 1, i, -1.0);
        }
    }
}

/// Rate limits on one schedule across the knot ending segment `s`:
/// `upper − ẇ ≥ 0` and `ẇ − lower ≥ 0` with `ẇ = (w_{s+1} − w_s) / Δt`.
pub struct WeightRate {
    pub block: ScheduleBlock,
    pub upper: f64,
    pub lower: f64,
    pub segment_duration: f64,
}

impl Term for WeightRate {
    fn rows(&self) -> usize {
        2
    }

    fn evaluate(&self, x: &[f64], at: &Sample, out: &mut RowSink<'_>) {
        let s = at.point.segment;
        let (a, b) = (self.block.index(s), self.block.index(s + 1));
        let inv = 1.0 / self.segment_duration;
        let rate = (x[b] - x[a]) * inv;
        out.set(0, self.upper - rate);
        out.set(1, rate - self.lower);
        out.add(0, a, inv);
        out.add(0, b, -inv);
        out.add(1, a, -inv);
        out.add(1, b, inv);
    }
}
