//! One-dimensional grasp coupling: a manipulator coordinate `m(t)`, an
//! object coordinate `p(t)` and a single association schedule `w`.
//!
//! With `w(m − p) = 0` and `ṗ − w ṁ = 0` the object can only move when
//! `w = 1`; the squared violation integral measures how far a pair of
//! trajectories is from that constraint set.

use crate::error::Result;
use crate::scene::{ScheduleBlock, SplineBlock};
use crate::solver::Problem;
use crate::trajectory::{locate, TrajectorySpline};

use super::{Family, PenaltyKind, ResidualBlock, RowSink, Sample, Term};

/// Intervals of the composite Simpson rule.
pub const SIMPSON_INTERVALS: usize = 1000;

pub trait Curve1d {
    fn value(&self, t: f64) -> f64;
    fn rate(&self, t: f64) -> f64;
}

/// First coordinate of a spline.
impl Curve1d for TrajectorySpline {
    fn value(&self, t: f64) -> f64 {
        self.eval(t).map_or(f64::NAN, |v| v[0])
    }

    fn rate(&self, t: f64) -> f64 {
        self.velocity(t).map_or(f64::NAN, |v| v[0])
    }
}

/// `start + slope · t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub start: f64,
    pub slope: f64,
}

impl Curve1d for Line {
    fn value(&self, t: f64) -> f64 {
        self.start + self.slope * t
    }

    fn rate(&self, _t: f64) -> f64 {
        self.slope
    }
}

fn simpson_weights(a: f64, b: f64) -> Vec<(f64, f64)> {
    let n = SIMPSON_INTERVALS;
    let h = (b - a) / n as f64;
    (0..=n)
        .map(|k| {
            let c = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            (if k == n { b } else { a + k as f64 * h }, c * h / 3.0)
        })
        .collect()
}

/// `∫ (w(m − p))² + (ṗ − w ṁ)² dt` over `[a, b]`.
pub fn manifold_distance_1d(m: &dyn Curve1d, p: &dyn Curve1d, w: f64, [a, b]: [f64; 2]) -> f64 {
    simpson_weights(a, b)
        .into_iter()
        .map(|(t, c)| {
            let pos = w * (m.value(t) - p.value(t));
            let vel = p.rate(t) - w * m.rate(t);
            c * (pos * pos + vel * vel)
        })
        .sum()
}

/// Variable layout of the toy: both splines, then the schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Toy1d {
    pub segments: usize,
    pub duration: f64,
    pub manipulator: SplineBlock,
    pub object: SplineBlock,
    pub weight: ScheduleBlock,
}

/// `w (m − p)`.
struct ToyPosition(Toy1d);

/// `ṗ − w ṁ`.
struct ToyVelocity(Toy1d);

impl Term for ToyPosition {
    fn rows(&self) -> usize {
        1
    }

    fn evaluate(&self, x: &[f64], at: &Sample, out: &mut RowSink<'_>) {
        let toy = &self.0;
        let dt = toy.segment_duration();
        let m = toy.manipulator.state(x, at.point, dt);
        let p = toy.object.state(x, at.point, dt);
        let wi = toy.weight.index(at.point.segment);
        let w = x[wi];
        out.set(0, w * (m.value[0] - p.value[0]));
        out.add(0, wi, m.value[0] - p.value[0]);
        let seg = at.point.segment;
        for (a, (mi, pi)) in toy
            .manipulator
            .nodal_indices(seg, 0)
            .into_iter()
            .zip(toy.object.nodal_indices(seg, 0))
            .enumerate()
        {
            out.add(0, mi, w * m.weights.value[a]);
            out.add(0, pi, -w * m.weights.value[a]);
        }
    }
}

impl Term for ToyVelocity {
    fn rows(&self) -> usize {
        1
    }

    fn evaluate(&self, x: &[f64], at: &Sample, out: &mut RowSink<'_>) {
        let toy = &self.0;
        let dt = toy.segment_duration();
        let m = toy.manipulator.state(x, at.point, dt);
        let p = toy.object.state(x, at.point, dt);
        let wi = toy.weight.index(at.point.segment);
        let w = x[wi];
        out.set(0, p.rate[0] - w * m.rate[0]);
        out.add(0, wi, -m.rate[0]);
        let seg = at.point.segment;
        for (a, (mi, pi)) in toy
            .manipulator
            .nodal_indices(seg, 0)
            .into_iter()
            .zip(toy.object.nodal_indices(seg, 0))
            .enumerate()
        {
            out.add(0, mi, -w * m.weights.velocity[a]);
            out.add(0, pi, m.weights.velocity[a]);
        }
    }
}

impl Toy1d {
    pub fn new(segments: usize, duration: f64) -> Self {
        let nodes = segments + 1;
        let manipulator = SplineBlock {
            offset: 0,
            dim: 1,
            nodes,
        };
        let object = SplineBlock {
            offset: manipulator.len(),
            dim: 1,
            nodes,
        };
        let weight = ScheduleBlock {
            offset: object.offset + object.len(),
            segments,
        };
        Self {
            segments,
            duration,
            manipulator,
            object,
            weight,
        }
    }

    pub fn variable_count(&self) -> usize {
        self.weight.offset + self.segments
    }

    pub fn segment_duration(&self) -> f64 {
        self.duration / self.segments as f64
    }

    /// Composite Simpson samples over the horizon, so that the weighted
    /// squared residuals sum to the manifold distance of the discretized
    /// trajectories.
    pub fn simpson_samples(&self) -> Result<Vec<Sample>> {
        simpson_weights(0.0, self.duration)
            .into_iter()
            .map(|(t, c)| {
                Ok(Sample {
                    time: t,
                    point: locate(t, self.duration, self.segments)?,
                    scale: c,
                })
            })
            .collect()
    }

    fn blocks(&self, kind: PenaltyKind, weight: f64, samples: Vec<Sample>) -> Vec<ResidualBlock> {
        vec![
            ResidualBlock::new(
                Family::Position,
                "toy_position",
                kind,
                weight,
                samples.clone(),
                ToyPosition(*self),
            ),
            ResidualBlock::new(
                Family::Velocity,
                "toy_velocity",
                kind,
                weight,
                samples,
                ToyVelocity(*self),
            ),
        ]
    }

    /// State with both coordinates on `p(t) = start + slope·t` and every
    /// weight set to `w`.
    pub fn matched_state(&self, line: Line, w: f64) -> Vec<f64> {
        let mut x = vec![0.0; self.variable_count()];
        let dt = self.segment_duration();
        for block in [self.manipulator, self.object] {
            for n in 0..=self.segments {
                x[block.value_index(n, 0)] = line.value(n as f64 * dt);
                x[block.tangent_index(n, 0)] = line.slope;
            }
        }
        for s in 0..self.segments {
            x[self.weight.index(s)] = w;
        }
        x
    }

    /// Minimizes the manifold distance over the manipulator trajectory with
    /// the object trajectory and the weight held fixed. `½ Σ` of the
    /// residuals equals half the Simpson estimate of the distance.
    pub fn fixed_weight_problem(&self) -> Result<Problem> {
        let pinned = self.object.range().chain(self.weight.range()).collect();
        Ok(Problem {
            variable_count: self.variable_count(),
            blocks: self.blocks(PenaltyKind::Objective, 1.0, self.simpson_samples()?),
            pinned,
        })
    }

    /// Both couplings as equality constraints at segment starts, midpoints
    /// and the horizon end, with the object's end values pinned and the
    /// weight kept in `[0, 1]`.
    pub fn transport_problem(&self, penalty: f64) -> Problem {
        let samples = super::path_samples(self.segments, self.segment_duration());
        let mut blocks = self.blocks(PenaltyKind::Equality, penalty, samples);
        blocks.push(ResidualBlock::new(
            Family::Bounds,
            "toy_weight_bounds",
            PenaltyKind::Inequality,
            penalty,
            vec![Sample {
                time: 0.0,
                point: crate::trajectory::SegmentPoint { segment: 0, u: 0.0 },
                scale: 1.0,
            }],
            super::schedule::Bounds {
                entries: self.weight.range().map(|i| (i, 0.0, 1.0)).collect(),
            },
        ));
        Problem {
            variable_count: self.variable_count(),
            blocks,
            pinned: vec![self.object.value_index(0, 0), self.object.value_index(self.segments, 0)],
        }
    }

    pub fn manipulator_spline(&self, x: &[f64]) -> Result<TrajectorySpline> {
        self.manipulator.to_spline(x, self.duration)
    }

    pub fn object_spline(&self, x: &[f64]) -> Result<TrajectorySpline> {
        self.object.to_spline(x, self.duration)
    }
}
