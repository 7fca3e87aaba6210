//! Flat indexing of every decision variable.
//!
//! Order: for each manipulator its joint spline (node values, then node
//! tangents, both node-major), its association weights for every target,
//! then its grasp parameters `(δ, θ)` for every target; for each object its
//! pose spline followed by one rest-weight schedule per rest pose; finally
//! the orientation weights of every manipulator-target pair when enabled.

use crate::error::{Error, Result};
use crate::geometry::CUBOID_GRASP_ORIENTATIONS;
use crate::trajectory::{HermiteWeights, SegmentPoint, SegmentSchedule, TrajectorySpline};

use super::spec::Scenario;

/// Coordinates of a Hermite spline stored in the flat vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplineBlock {
    pub offset: usize,
    pub dim: usize,
    pub nodes: usize,
}

impl SplineBlock {
    pub fn len(&self) -> usize {
        2 * self.dim * self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }

    pub fn value_index(&self, node: usize, coord: usize) -> usize {
        self.offset + node * self.dim + coord
    }

    pub fn tangent_index(&self, node: usize, coord: usize) -> usize {
        self.offset + self.dim * self.nodes + node * self.dim + coord
    }

    /// Indices of `(v_s, v_{s+1}, g_s, g_{s+1})` for one coordinate, matching
    /// the coefficient order of [`HermiteWeights`].
    pub fn nodal_indices(&self, segment: usize, coord: usize) -> [usize; 4] {
        [
            self.value_index(segment, coord),
            self.value_index(segment + 1, coord),
            self.tangent_index(segment, coord),
            self.tangent_index(segment + 1, coord),
        ]
    }

    pub fn value_indices(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.dim * self.nodes
    }

    /// Value, rate and acceleration of every coordinate at `at`.
    pub fn state(&self, x: &[f64], at: SegmentPoint, segment_duration: f64) -> SplineState {
        let h = HermiteWeights::new(at.u, segment_duration);
        let mut out = SplineState {
            value: vec![0.0; self.dim],
            rate: vec![0.0; self.dim],
            acceleration: vec![0.0; self.dim],
            weights: h,
        };
        for c in 0..self.dim {
            let idx = self.nodal_indices(at.segment, c);
            for (a, &i) in idx.iter().enumerate() {
                out.value[c] += h.value[a] * x[i];
                out.rate[c] += h.velocity[a] * x[i];
                out.acceleration[c] += h.acceleration[a] * x[i];
            }
        }
        out
    }

    pub fn to_spline(&self, x: &[f64], duration: f64) -> Result<TrajectorySpline> {
        let values = (0..self.nodes)
            .map(|s| (0..self.dim).map(|c| x[self.value_index(s, c)]).collect())
            .collect();
        let tangents = (0..self.nodes)
            .map(|s| (0..self.dim).map(|c| x[self.tangent_index(s, c)]).collect())
            .collect();
        TrajectorySpline::new(duration, values, tangents)
    }

    pub fn scatter(&self, x: &mut [f64], spline: &TrajectorySpline) -> Result<()> {
        if spline.dim() != self.dim || spline.nodes() != self.nodes {
            return Err(Error::DimensionMismatch {
                context: "spline block",
                expected: self.len(),
                actual: 2 * spline.dim() * spline.nodes(),
            });
        }
        for s in 0..self.nodes {
            for c in 0..self.dim {
                x[self.value_index(s, c)] = spline.value_at_node(s)[c];
                x[self.tangent_index(s, c)] = spline.tangent_at_node(s)[c];
            }
        }
        Ok(())
    }
}

/// Spline coordinates and their Hermite coefficients at one sample.
#[derive(Debug, Clone)]
pub struct SplineState {
    pub value: Vec<f64>,
    pub rate: Vec<f64>,
    pub acceleration: Vec<f64>,
    pub weights: HermiteWeights,
}

/// One piecewise-constant schedule stored in the flat vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleBlock {
    pub offset: usize,
    pub segments: usize,
}

impl ScheduleBlock {
    pub fn index(&self, segment: usize) -> usize {
        debug_assert!(segment < self.segments);
        self.offset + segment
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.segments
    }

    pub fn values<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.range()]
    }

    pub fn to_schedule(&self, x: &[f64], duration: f64) -> Result<SegmentSchedule> {
        SegmentSchedule::new(self.values(x).to_vec(), duration)
    }

    pub fn scatter(&self, x: &mut [f64], values: &[f64]) -> Result<()> {
        if values.len() != self.segments {
            return Err(Error::DimensionMismatch {
                context: "schedule block",
                expected: self.segments,
                actual: values.len(),
            });
        }
        x[self.range()].copy_from_slice(values);
        Ok(())
    }
}

/// What a manipulator can associate with: a free object, or the handle of
/// an articulated (interactive) manipulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Object(usize),
    Handle(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairBlocks {
    pub robot: usize,
    pub target: Target,
    pub weight: ScheduleBlock,
    /// Index of `δ`; `θ` follows.
    pub grasp: usize,
    pub orientation: Option<[ScheduleBlock; CUBOID_GRASP_ORIENTATIONS]>,
}

impl PairBlocks {
    pub fn delta_index(&self) -> usize {
        self.grasp
    }

    pub fn theta_index(&self) -> usize {
        self.grasp + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectBlocks {
    pub spline: SplineBlock,
    pub rest: Vec<ScheduleBlock>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableLayout {
    pub robots: Vec<SplineBlock>,
    pub objects: Vec<ObjectBlocks>,
    pub pairs: Vec<PairBlocks>,
    pub segments: usize,
    pub duration: f64,
    total: usize,
    names: Names,
}

#[derive(Debug, Clone, PartialEq)]
struct Names {
    robots: Vec<String>,
    objects: Vec<String>,
}

/// Targets a manipulator can associate with, in layout order.
pub fn targets_of(scenario: &Scenario, robot: usize) -> Vec<Target> {
    let mut out: Vec<Target> = (0..scenario.objects.len()).map(Target::Object).collect();
    if !scenario.robots[robot].is_interactive() {
        out.extend(
            scenario
                .robots
                .iter()
                .enumerate()
                .filter(|(h, r)| *h != robot && r.is_interactive())
                .map(|(h, _)| Target::Handle(h)),
        );
    }
    out
}

impl VariableLayout {
    pub fn new(scenario: &Scenario) -> Self {
        let nodes = scenario.nodes();
        let segments = scenario.segments();
        let mut offset = 0;
        let mut robots = Vec::new();
        let mut pairs = Vec::new();
        for (i, robot) in scenario.robots.iter().enumerate() {
            let spline = SplineBlock {
                offset,
                dim: robot.chain.dof(),
                nodes,
            };
            offset += spline.len();
            robots.push(spline);
            let targets = targets_of(scenario, i);
            let mut weights = Vec::new();
            for _ in &targets {
                weights.push(ScheduleBlock { offset, segments });
                offset += segments;
            }
            for (target, weight) in targets.into_iter().zip(weights) {
                pairs.push(PairBlocks {
                    robot: i,
                    target,
                    weight,
                    grasp: offset,
                    orientation: None,
                });
                offset += 2;
            }
        }
        let mut objects = Vec::new();
        for obj in &scenario.objects {
            let spline = SplineBlock { offset, dim: 6, nodes };
            offset += spline.len();
            let rest = (0..obj.rest_poses().len())
                .map(|_| {
                    let b = ScheduleBlock { offset, segments };
                    offset += segments;
                    b
                })
                .collect();
            objects.push(ObjectBlocks { spline, rest });
        }
        if scenario.extensions.orientation_weights {
            for pair in &mut pairs {
                let blocks = std::array::from_fn(|k| ScheduleBlock {
                    offset: offset + k * segments,
                    segments,
                });
                offset += CUBOID_GRASP_ORIENTATIONS * segments;
                pair.orientation = Some(blocks);
            }
        }
        Self {
            robots,
            objects,
            pairs,
            segments,
            duration: scenario.horizon.duration,
            total: offset,
            names: Names {
                robots: scenario.robots.iter().map(|r| r.name.clone()).collect(),
                objects: scenario.objects.iter().map(|o| o.name.clone()).collect(),
            },
        }
    }

    pub fn total_count(&self) -> usize {
        self.total
    }

    pub fn nodes(&self) -> usize {
        self.segments + 1
    }

    pub fn segment_duration(&self) -> f64 {
        self.duration / self.segments as f64
    }

    pub fn pairs_of_robot(&self, robot: usize) -> impl Iterator<Item = &PairBlocks> {
        self.pairs.iter().filter(move |p| p.robot == robot)
    }

    pub fn pairs_of_target(&self, target: Target) -> impl Iterator<Item = &PairBlocks> {
        self.pairs.iter().filter(move |p| p.target == target)
    }

    pub fn pair(&self, robot: usize, target: Target) -> Option<&PairBlocks> {
        self.pairs.iter().find(|p| p.robot == robot && p.target == target)
    }

    pub fn robot_name(&self, i: usize) -> &str {
        &self.names.robots[i]
    }

    pub fn object_name(&self, j: usize) -> &str {
        &self.names.objects[j]
    }

    pub fn target_name(&self, t: Target) -> String {
        match t {
            Target::Object(j) => self.names.objects[j].clone(),
            Target::Handle(h) => format!("{}.handle", self.names.robots[h]),
        }
    }

    /// Indices of every schedule-valued variable (weights in `[0, 1]`).
    pub fn schedule_blocks(&self) -> Vec<ScheduleBlock> {
        let mut out: Vec<ScheduleBlock> = self.pairs.iter().map(|p| p.weight).collect();
        for o in &self.objects {
            out.extend(o.rest.iter().copied());
        }
        for p in &self.pairs {
            if let Some(g) = &p.orientation {
                out.extend(g.iter().copied());
            }
        }
        out
    }

    /// Human-readable identifier of every variable, in layout order.
    pub fn names(&self) -> Vec<String> {
        let mut out = vec![String::new(); self.total];
        let spline = |out: &mut Vec<String>, b: &SplineBlock, prefix: &str, coord: &dyn Fn(usize) -> String| {
            for s in 0..b.nodes {
                for c in 0..b.dim {
                    out[b.value_index(s, c)] = format!("{prefix}.{}.n{s}", coord(c));
                    out[b.tangent_index(s, c)] = format!("{prefix}.{}.n{s}.rate", coord(c));
                }
            }
        };
        let schedule = |out: &mut Vec<String>, b: &ScheduleBlock, prefix: &str| {
            for s in 0..b.segments {
                out[b.index(s)] = format!("{prefix}.s{s}");
            }
        };
        for (i, b) in self.robots.iter().enumerate() {
            spline(&mut out, b, self.robot_name(i), &|c| format!("q{c}"));
        }
        for p in &self.pairs {
            let prefix = format!("{}>{}", self.robot_name(p.robot), self.target_name(p.target));
            schedule(&mut out, &p.weight, &format!("w.{prefix}"));
            out[p.delta_index()] = format!("delta.{prefix}");
            out[p.theta_index()] = format!("theta.{prefix}");
            if let Some(g) = &p.orientation {
                for (k, b) in g.iter().enumerate() {
                    schedule(&mut out, b, &format!("gamma{k}.{prefix}"));
                }
            }
        }
        const POSE: [&str; 6] = ["x", "y", "z", "roll", "pitch", "yaw"];
        for (j, o) in self.objects.iter().enumerate() {
            spline(&mut out, &o.spline, self.object_name(j), &|c| POSE[c].to_string());
            for (d, b) in o.rest.iter().enumerate() {
                schedule(&mut out, b, &format!("r{d}.{}", self.object_name(j)));
            }
        }
        out
    }
}

/// Decision-variable count of a scenario.
pub fn count_variables(scenario: &Scenario) -> usize {
    VariableLayout::new(scenario).total_count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::presets;
    use proptest::prelude::*;

    #[test]
    fn line_scenarios_match_reference_counts() {
        let counts: Vec<usize> = (1..=5).map(|k| count_variables(&presets::arm_line(k))).collect();
        assert_eq!(counts, vec![305, 436, 567, 698, 829]);
    }

    #[test]
    fn count_decomposes_per_manipulator() {
        // 6 joints × 10 nodes × (value, tangent) + 9 weights + (δ, θ).
        let per_arm = 6 * 10 * 2 + 9 + 2;
        // 6 pose coordinates × 10 nodes × 2 + 6 rest schedules × 9 segments.
        let object = 6 * 10 * 2 + 6 * 9;
        assert_eq!((per_arm, object), (131, 174));
        for k in 1..=5 {
            assert_eq!(count_variables(&presets::arm_line(k)), object + per_arm * k);
        }
    }

    #[test]
    fn empty_object_list_counts_manipulators_only() {
        let mut s = presets::arm_line(2);
        s.objects.clear();
        assert_eq!(count_variables(&s), 2 * 120);
    }

    #[test]
    fn blocks_are_disjoint_and_contiguous() {
        let mut s = presets::drawer();
        s.extensions.orientation_weights = true;
        let layout = VariableLayout::new(&s);
        let mut ranges: Vec<std::ops::Range<usize>> = layout.robots.iter().map(|b| b.range()).collect();
        for p in &layout.pairs {
            ranges.push(p.weight.range());
            ranges.push(p.grasp..p.grasp + 2);
            for g in p.orientation.iter().flatten() {
                ranges.push(g.range());
            }
        }
        for o in &layout.objects {
            ranges.push(o.spline.range());
            ranges.extend(o.rest.iter().map(|r| r.range()));
        }
        ranges.sort_by_key(|r| r.start);
        let mut next = 0;
        for r in &ranges {
            assert_eq!(r.start, next);
            next = r.end;
        }
        assert_eq!(next, layout.total_count());
        let names = layout.names();
        assert!(names.iter().all(|n| !n.is_empty()));
    }

    proptest! {
        #[test]
        fn scatter_gather_round_trip(values in proptest::collection::vec(-5.0f64..5.0, 9 * 2 * 6)) {
            let s = presets::planar_pick_place();
            let layout = VariableLayout::new(&s);
            let mut x = vec![0.0; layout.total_count()];
            let block = layout.objects[0].spline;
            let spline = TrajectorySpline::new(
                s.horizon.duration,
                values[..60].chunks(6).map(|c| c.to_vec()).collect(),
                values[60..].chunks(6).take(10).map(|c| c.to_vec()).chain(std::iter::repeat(vec![0.0; 6])).take(10).collect(),
            ).unwrap();
            block.scatter(&mut x, &spline).unwrap();
            prop_assert_eq!(block.to_spline(&x, s.horizon.duration).unwrap(), spline);
            let w = layout.pairs[0].weight;
            w.scatter(&mut x, &values[..9]).unwrap();
            prop_assert_eq!(w.values(&x), &values[..9]);
        }
    }
}
