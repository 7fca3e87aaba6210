use crate::geometry::{CollisionPrimitive, Pose, Transform};
use crate::scene::{RestPose, Scenario, VariableLayout};

/// Immutable problem data shared by every term of one scenario.
#[derive(Debug, Clone)]
pub struct Model {
    pub scenario: Scenario,
    pub layout: VariableLayout,
    pub(crate) handles: Vec<Option<Transform>>,
    pub(crate) gripper_offsets: Vec<Pose>,
    pub(crate) rest_poses: Vec<Vec<RestPose>>,
    pub(crate) object_primitives: Vec<Vec<CollisionPrimitive>>,
}

impl Model {
    pub fn new(scenario: Scenario) -> Self {
        let layout = VariableLayout::new(&scenario);
        let handles = scenario
            .robots
            .iter()
            .map(|r| r.interactive.as_ref().map(|i| i.handle.to_transform()))
            .collect();
        let gripper_offsets = scenario.robots.iter().map(|r| r.gripper_offset).collect();
        let rest_poses = scenario.objects.iter().map(|o| o.rest_poses()).collect();
        let object_primitives = scenario.objects.iter().map(|o| o.collision_primitives()).collect();
        Self {
            scenario,
            layout,
            handles,
            gripper_offsets,
            rest_poses,
            object_primitives,
        }
    }

    pub fn segment_duration(&self) -> f64 {
        self.layout.segment_duration()
    }
}
