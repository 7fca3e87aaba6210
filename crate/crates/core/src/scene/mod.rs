//! Scenario description, the flat variable layout and initialization.

pub mod init;
pub mod layout;
pub mod presets;
pub mod spec;

pub use init::{
    initial_guess, initialize, initialize_linear, initialize_multi_object, jitter_weights, object_indices, presolve,
    transport_windows,
};
pub use layout::{
    count_variables, targets_of, ObjectBlocks, PairBlocks, ScheduleBlock, SplineBlock, Target, VariableLayout,
};
pub use spec::{
    Extensions, Horizon, InteractiveSpec, ManipulatorSpec, ObjectSpec, ObjectiveWeights, Obstacle, PenaltyWeights,
    RateLimits, RestPose, Scenario,
};
