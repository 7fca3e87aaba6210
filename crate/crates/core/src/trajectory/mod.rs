//! Cubic Hermite trajectories and piecewise-constant schedules.

pub mod schedule;
pub mod spline;

pub use schedule::SegmentSchedule;
pub use spline::{locate, HermiteWeights, SegmentPoint, SplineRow, TrajectorySpline};
