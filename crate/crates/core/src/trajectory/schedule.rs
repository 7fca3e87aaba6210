use crate::error::{Error, Result};

use super::spline::locate;

/// Piecewise-constant function of time on `N − 1` uniform segments.
///
/// Evaluation is right-continuous: a knot time belongs to the segment that
/// starts there, and the horizon end belongs to the last segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSchedule {
    values: Vec<f64>,
    duration: f64,
}

impl SegmentSchedule {
    pub fn new(values: Vec<f64>, duration: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidScenario("schedule needs at least one segment".into()));
        }
        if !(duration > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "schedule duration must be positive, got {duration}"
            )));
        }
        Ok(Self { values, duration })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn segments(&self) -> usize {
        self.values.len()
    }

    pub fn segment_duration(&self) -> f64 {
        self.duration / self.segments() as f64
    }

    pub fn segment_at(&self, t: f64) -> Result<usize> {
        Ok(locate(t, self.duration, self.segments())?.segment)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.segment_at(t)?])
    }

    /// Forward difference between segment `s` and `s + 1`, per second.
    pub fn rate(&self, s: usize) -> Result<f64> {
        if s + 1 >= self.segments() {
            return Err(Error::OutOfRange {
                what: "schedule rate index",
                detail: format!("{s} not in 0..{}", self.segments().saturating_sub(1)),
            });
        }
        Ok((self.values[s + 1] - self.values[s]) / self.segment_duration())
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.segment_duration()
    }

    /// Largest deviation outside `[0, 1]`.
    pub fn bound_violation(&self) -> f64 {
        self.values
            .iter()
            .map(|&v| (-v).max(v - 1.0).max(0.0))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_schedule() {
        let s = SegmentSchedule::new(vec![0.5; 9], 9.0).unwrap();
        for t in [0.0, 0.3, 1.0, 4.5, 9.0] {
            assert_eq!(s.eval(t).unwrap(), 0.5);
        }
        for k in 0..8 {
            assert_eq!(s.rate(k).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_step_rate() {
        let s = SegmentSchedule::new(vec![0.0, 1.0], 2.0).unwrap();
        assert_eq!(s.rate(0).unwrap(), 1.0);
        assert!(s.rate(1).is_err());
    }

    #[test]
    fn right_continuous_at_knots() {
        let s = SegmentSchedule::new(vec![0.1, 0.2, 0.3], 3.0).unwrap();
        assert_eq!(s.eval(1.0).unwrap(), 0.2);
        assert_eq!(s.eval(0.999).unwrap(), 0.1);
        assert_eq!(s.eval(3.0).unwrap(), 0.3);
        assert!(s.eval(3.1).is_err());
    }

    #[test]
    fn integral_is_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let values: Vec<f64> = (0..12).map(|_| rng.random_range(0.0..1.0)).collect();
        let s = SegmentSchedule::new(values.clone(), 6.0).unwrap();
        let mut oracle = 0.0;
        for v in &values {
            oracle += v * 0.5;
        }
        assert_eq!(s.integral(), values.iter().sum::<f64>() * 0.5);
        assert!((s.integral() - oracle).abs() < 1e-14);
    }
}
