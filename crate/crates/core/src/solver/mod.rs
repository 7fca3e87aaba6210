//! Penalized least-squares solver.

pub mod assemble;
pub mod audit;
pub mod config;
pub mod gauss_newton;
pub mod linear;
pub mod problem;

pub use assemble::{assemble, Assembly, Execution};
pub use audit::Audit;
pub use config::{InitStrategy, PenaltyRamp, SolverConfig};
pub use gauss_newton::{solve, solve_with, IterationRecord, SolveResult, Termination};
pub use linear::gauss_newton_step;
pub use problem::{Problem, ScenarioProblem};
