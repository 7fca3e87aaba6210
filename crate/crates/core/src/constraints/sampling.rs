//! Sample rules. Samples are stored as segment points so that knots are hit
//! exactly, without going through floating-point times.

use super::Sample;
use crate::trajectory::SegmentPoint;

/// Points per segment of the collision rule, both endpoints included.
pub const COLLISION_POINTS_PER_SEGMENT: usize = 11;

fn sample(segment: usize, u: f64, dt: f64, scale: f64) -> Sample {
    Sample {
        time: (segment as f64 + u) * dt,
        point: SegmentPoint { segment, u },
        scale,
    }
}

/// Every segment start and midpoint plus the horizon end:
/// `2 (N − 1) + 1` distinct times.
pub fn path_samples(segments: usize, dt: f64) -> Vec<Sample> {
    let mut out: Vec<Sample> = (0..segments)
        .flat_map(|s| [sample(s, 0.0, dt, 1.0), sample(s, 0.5, dt, 1.0)])
        .collect();
    out.push(sample(segments - 1, 1.0, dt, 1.0));
    out
}

/// [`path_samples`] with trapezoid weights, so that
/// `Σ scale · q(t)²` approximates `∫ q(t)² dt`.
pub fn quadrature_samples(segments: usize, dt: f64) -> Vec<Sample> {
    let mut out = path_samples(segments, dt);
    let last = out.len() - 1;
    for (k, s) in out.iter_mut().enumerate() {
        s.scale = if k == 0 || k == last { 0.25 * dt } else { 0.5 * dt };
    }
    out
}

/// Eleven equally spaced points on every segment; shared knots appear
/// twice, once as the end of one segment and once as the start of the next.
pub fn collision_samples(segments: usize, dt: f64) -> Vec<Sample> {
    let last = (COLLISION_POINTS_PER_SEGMENT - 1) as f64;
    (0..segments)
        .flat_map(|s| (0..COLLISION_POINTS_PER_SEGMENT).map(move |k| sample(s, k as f64 / last, dt, 1.0)))
        .collect()
}

/// One sample per segment (at its midpoint) for quantities that depend on
/// schedules only.
pub fn segment_samples(segments: usize, dt: f64) -> Vec<Sample> {
    (0..segments).map(|s| sample(s, 0.5, dt, 1.0)).collect()
}

/// One sample per interior knot, expressed as the end of the segment before
/// it.
pub fn boundary_samples(segments: usize, dt: f64) -> Vec<Sample> {
    (0..segments.saturating_sub(1))
        .map(|s| sample(s, 1.0, dt, 1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_rule_counts_distinct_times() {
        let s = path_samples(9, 1.0);
        assert_eq!(s.len(), 19);
        let mut times: Vec<f64> = s.iter().map(|s| s.time).collect();
        times.dedup();
        assert_eq!(times.len(), 19);
        assert_eq!(times.last(), Some(&9.0));
    }

    #[test]
    fn quadrature_weights_sum_to_horizon() {
        let s = quadrature_samples(7, 0.3);
        let total: f64 = s.iter().map(|s| s.scale).sum();
        assert!((total - 2.1).abs() < 1e-12);
    }

    #[test]
    fn collision_rule_keeps_duplicates() {
        let s = collision_samples(9, 1.0);
        assert_eq!(s.len(), 99);
        assert_eq!(s[10].time, s[11].time);
    }
}
