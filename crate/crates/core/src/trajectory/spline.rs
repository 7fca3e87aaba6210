use crate::error::{Error, Result};

/// A location on a uniformly-knotted trajectory: segment index and local
/// parameter `u ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentPoint {
    pub segment: usize,
    pub u: f64,
}

/// Coefficients of value, velocity and acceleration on the four nodal
/// quantities `(v_s, v_{s+1}, g_s, g_{s+1})` of the containing segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteWeights {
    pub value: [f64; 4],
    pub velocity: [f64; 4],
    pub acceleration: [f64; 4],
}

impl HermiteWeights {
    pub fn new(u: f64, dt: f64) -> Self {
        let u2 = u * u;
        let u3 = u2 * u;
        let value = [
            2.0 * u3 - 3.0 * u2 + 1.0,
            -2.0 * u3 + 3.0 * u2,
            (u3 - 2.0 * u2 + u) * dt,
            (u3 - u2) * dt,
        ];
        let velocity = [
            (6.0 * u2 - 6.0 * u) / dt,
            (-6.0 * u2 + 6.0 * u) / dt,
            3.0 * u2 - 4.0 * u + 1.0,
            3.0 * u2 - 2.0 * u,
        ];
        let acceleration = [
            (12.0 * u - 6.0) / (dt * dt),
            (-12.0 * u + 6.0) / (dt * dt),
            (6.0 * u - 4.0) / dt,
            (6.0 * u - 2.0) / dt,
        ];
        Self {
            value,
            velocity,
            acceleration,
        }
    }
}

/// Locates `t` on a horizon of `segments` uniform segments. Times that hit a
/// knot (up to round-off) are snapped onto it and assigned to the segment
/// that starts there; `t = duration` belongs to the last segment.
pub fn locate(t: f64, duration: f64, segments: usize) -> Result<SegmentPoint> {
    if !(0.0..=duration).contains(&t) {
        return Err(Error::OutOfRange {
            what: "sample time",
            detail: format!("{t} not in [0, {duration}]"),
        });
    }
    let dt = duration / segments as f64;
    let x = t / dt;
    let nearest = x.round();
    let (segment, u) = if (x - nearest).abs() < 1e-12 {
        let k = nearest as usize;
        if k >= segments {
            (segments - 1, 1.0)
        } else {
            (k, 0.0)
        }
    } else {
        let k = (x.floor() as usize).min(segments - 1);
        (k, x - k as f64)
    };
    Ok(SegmentPoint { segment, u })
}

/// Sparse derivative row of a spline quantity with respect to nodal data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplineRow {
    /// Nodes `s` and `s + 1` of the containing segment.
    pub nodes: [usize; 2],
    pub weights: HermiteWeights,
}

/// Cubic Hermite spline over `N` uniformly spaced nodes. Node values and node
/// tangents (units per second) are independent data.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpline {
    dim: usize,
    duration: f64,
    values: Vec<Vec<f64>>,
    tangents: Vec<Vec<f64>>,
}

impl TrajectorySpline {
    pub fn new(duration: f64, values: Vec<Vec<f64>>, tangents: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() < 2 || values.len() != tangents.len() {
            return Err(Error::InvalidScenario(format!(
                "spline needs at least two nodes with matching tangents ({} values, {} tangents)",
                values.len(),
                tangents.len()
            )));
        }
        if !(duration > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "spline duration must be positive, got {duration}"
            )));
        }
        let dim = values[0].len();
        if values.iter().chain(&tangents).any(|v| v.len() != dim) {
            return Err(Error::InvalidScenario("spline nodes differ in dimension".into()));
        }
        Ok(Self {
            dim,
            duration,
            values,
            tangents,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn nodes(&self) -> usize {
        self.values.len()
    }

    pub fn segment_duration(&self) -> f64 {
        self.duration / (self.nodes() - 1) as f64
    }

    pub fn node_time(&self, s: usize) -> f64 {
        s as f64 * self.segment_duration()
    }

    pub fn value_at_node(&self, s: usize) -> &[f64] {
        &self.values[s]
    }

    pub fn tangent_at_node(&self, s: usize) -> &[f64] {
        &self.tangents[s]
    }

    pub fn locate(&self, t: f64) -> Result<SegmentPoint> {
        locate(t, self.duration, self.nodes() - 1)
    }

    pub fn basis_derivatives(&self, t: f64) -> Result<SplineRow> {
        let p = self.locate(t)?;
        Ok(SplineRow {
            nodes: [p.segment, p.segment + 1],
            weights: HermiteWeights::new(p.u, self.segment_duration()),
        })
    }

    fn combine(&self, row: &SplineRow, coeffs: &[f64; 4]) -> Vec<f64> {
        let [a, b] = row.nodes;
        (0..self.dim)
            .map(|c| {
                coeffs[0] * self.values[a][c]
                    + coeffs[1] * self.values[b][c]
                    + coeffs[2] * self.tangents[a][c]
                    + coeffs[3] * self.tangents[b][c]
            })
            .collect()
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let row = self.basis_derivatives(t)?;
        if row.weights.value == [1.0, 0.0, 0.0, 0.0] {
            return Ok(self.values[row.nodes[0]].clone());
        }
        if row.weights.value == [0.0, 1.0, 0.0, 0.0] {
            return Ok(self.values[row.nodes[1]].clone());
        }
        Ok(self.combine(&row, &row.weights.value))
    }

    pub fn velocity(&self, t: f64) -> Result<Vec<f64>> {
        let row = self.basis_derivatives(t)?;
        Ok(self.combine(&row, &row.weights.velocity))
    }

    pub fn acceleration(&self, t: f64) -> Result<Vec<f64>> {
        let row = self.basis_derivatives(t)?;
        Ok(self.combine(&row, &row.weights.acceleration))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spline(rng: &mut ChaCha8Rng, n: usize, dim: usize, duration: f64) -> TrajectorySpline {
        let node = |rng: &mut ChaCha8Rng| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let values = (0..n).map(|_| node(rng)).collect();
        let tangents = (0..n).map(|_| node(rng)).collect();
        TrajectorySpline::new(duration, values, tangents).unwrap()
    }

    #[test]
    fn interpolates_node_values_and_tangents_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_spline(&mut rng, 10, 3, 9.7);
        for k in 0..10 {
            let t = s.node_time(k);
            assert_eq!(s.eval(t).unwrap(), s.value_at_node(k));
            let v = s.velocity(t).unwrap();
            for c in 0..3 {
                assert_abs_diff_eq!(v[c], s.tangent_at_node(k)[c], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn midpoint_with_zero_tangents_is_mean() {
        let s = TrajectorySpline::new(2.0, vec![vec![1.0], vec![3.0]], vec![vec![0.0], vec![0.0]]).unwrap();
        assert_eq!(s.eval(1.0).unwrap(), vec![2.0]);
    }

    #[test]
    fn constant_segment_has_zero_velocity() {
        let s = TrajectorySpline::new(1.0, vec![vec![0.4], vec![0.4]], vec![vec![0.0], vec![0.0]]).unwrap();
        for t in [0.0, 0.13, 0.5, 0.77, 1.0] {
            assert_abs_diff_eq!(s.velocity(t).unwrap()[0], 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn outside_horizon_is_an_error() {
        let s = TrajectorySpline::new(1.0, vec![vec![0.0], vec![1.0]], vec![vec![0.0], vec![0.0]]).unwrap();
        assert!(s.eval(1.0 + 1e-9).is_err());
        assert!(s.velocity(-1e-9).is_err());
    }

    #[test]
    fn basis_rows_at_node_and_midpoint() {
        let s = TrajectorySpline::new(4.0, vec![vec![0.0]; 5], vec![vec![0.0]; 5]).unwrap();
        let row = s.basis_derivatives(2.0).unwrap();
        assert_eq!(row.nodes, [2, 3]);
        assert_eq!(row.weights.value, [1.0, 0.0, 0.0, 0.0]);
        let row = s.basis_derivatives(2.5).unwrap();
        assert_eq!(row.weights.value, [0.5, 0.5, 1.0 / 8.0, -1.0 / 8.0]);
    }

    // Independent oracle: expand the segment in monomial form from the
    // end-point conditions and evaluate with Horner's rule.
    fn monomial_oracle(p0: f64, p1: f64, m0: f64, m1: f64, dt: f64, u: f64) -> f64 {
        let (g0, g1) = (m0 * dt, m1 * dt);
        let a = 2.0 * p0 - 2.0 * p1 + g0 + g1;
        let b = -3.0 * p0 + 3.0 * p1 - 2.0 * g0 - g1;
        ((a * u + b) * u + g0) * u + p0
    }

    #[test]
    fn matches_monomial_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_spline(&mut rng, 6, 2, 3.0);
        let dt = s.segment_duration();
        for _ in 0..200 {
            let t = rng.random_range(0.0..3.0);
            let p = s.locate(t).unwrap();
            let (a, b) = (p.segment, p.segment + 1);
            let v = s.eval(t).unwrap();
            for c in 0..2 {
                let oracle = monomial_oracle(
                    s.value_at_node(a)[c],
                    s.value_at_node(b)[c],
                    s.tangent_at_node(a)[c],
                    s.tangent_at_node(b)[c],
                    dt,
                    p.u,
                );
                assert!((v[c] - oracle).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_spline(&mut rng, 5, 2, 2.0);
        let h = 1e-6;
        for _ in 0..50 {
            let t = rng.random_range(0.01..1.99);
            let fd_v: Vec<f64> = s
                .eval(t + h)
                .unwrap()
                .iter()
                .zip(s.eval(t - h).unwrap())
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            let fd_a: Vec<f64> = s
                .velocity(t + h)
                .unwrap()
                .iter()
                .zip(s.velocity(t - h).unwrap())
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            let (v, a) = (s.velocity(t).unwrap(), s.acceleration(t).unwrap());
            for c in 0..2 {
                // Skip samples whose stencil straddles a knot, where the
                // acceleration jumps.
                let p0 = s.locate(t - h).unwrap().segment;
                let p1 = s.locate(t + h).unwrap().segment;
                assert!((fd_v[c] - v[c]).abs() <= 1e-5 * v[c].abs().max(1.0));
                if p0 == p1 {
                    assert!((fd_a[c] - a[c]).abs() <= 1e-5 * a[c].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn basis_rows_match_nodal_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = random_spline(&mut rng, 4, 1, 3.0);
        let h = 1e-6;
        for _ in 0..20 {
            let t = rng.random_range(0.0..3.0);
            let row = s.basis_derivatives(t).unwrap();
            for (slot, (node, tangent)) in [(0, false), (1, false), (0, true), (1, true)].iter().enumerate() {
                let node = row.nodes[*node];
                let perturbed = |delta: f64| {
                    let mut values: Vec<Vec<f64>> = (0..4).map(|k| s.value_at_node(k).to_vec()).collect();
                    let mut tangents: Vec<Vec<f64>> = (0..4).map(|k| s.tangent_at_node(k).to_vec()).collect();
                    if *tangent {
                        tangents[node][0] += delta;
                    } else {
                        values[node][0] += delta;
                    }
                    let q = TrajectorySpline::new(3.0, values, tangents).unwrap();
                    [
                        q.eval(t).unwrap()[0],
                        q.velocity(t).unwrap()[0],
                        q.acceleration(t).unwrap()[0],
                    ]
                };
                let (p, m) = (perturbed(h), perturbed(-h));
                let w = row.weights;
                for (k, expected) in [w.value[slot], w.velocity[slot], w.acceleration[slot]]
                    .iter()
                    .enumerate()
                {
                    let fd = (p[k] - m[k]) / (2.0 * h);
                    assert!((fd - expected).abs() <= 1e-6 * expected.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn velocity_is_continuous_across_knots() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = random_spline(&mut rng, 7, 2, 6.0);
        let dt = s.segment_duration();
        for k in 1..6 {
            let left = HermiteWeights::new(1.0, dt).velocity;
            let right = HermiteWeights::new(0.0, dt).velocity;
            for c in 0..2 {
                let l = left[0] * s.value_at_node(k - 1)[c]
                    + left[1] * s.value_at_node(k)[c]
                    + left[2] * s.tangent_at_node(k - 1)[c]
                    + left[3] * s.tangent_at_node(k)[c];
                let r = right[0] * s.value_at_node(k)[c]
                    + right[1] * s.value_at_node(k + 1)[c]
                    + right[2] * s.tangent_at_node(k)[c]
                    + right[3] * s.tangent_at_node(k + 1)[c];
                assert!((l - r).abs() <= 1e-12);
            }
        }
    }
}
