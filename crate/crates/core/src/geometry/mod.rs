//! Poses, serial-chain kinematics, the grasp map and collision primitives.

pub mod collision;
pub mod grasp;
pub mod kinematics;
pub mod pose;

pub use collision::{primitive_distance_sq, CollisionPrimitive, DistanceSq, PrimitiveKind};
pub use grasp::{grasp_pose, grasp_pose_oriented, GraspParams, CUBOID_GRASP_ORIENTATIONS};
pub use kinematics::{
    frame_jet, tool_jet_from_frames, ChainFrames, Joint, JointKind, KinematicChain, LinkPrimitive, ToolJet,
};
pub use pose::{Mat3, Pose, Transform, Vec3};
