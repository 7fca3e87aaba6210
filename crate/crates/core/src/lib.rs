pub mod check;
pub mod constraints;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod objective;
pub mod scene;
pub mod solver;
pub mod trajectory;

pub use error::{Error, Result};
