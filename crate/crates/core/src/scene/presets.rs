//! Ready-made desk-scale scenarios used by the tests, the benches and the
//! `--preset` option of the command-line tool.
//!
//! Planar arms are horizontal three-link chains with vertical joint axes at
//! height [`PLANAR_HEIGHT`]; they grasp upright cuboids from above, so the
//! grasp offset `δ` stays at zero and `θ` absorbs the yaw difference.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::geometry::{CollisionPrimitive, Joint, KinematicChain, LinkPrimitive, Pose};
use crate::solver::{InitStrategy, PenaltyRamp, SolverConfig};

use super::spec::{
    Extensions, Horizon, InteractiveSpec, ManipulatorSpec, ObjectSpec, ObjectiveWeights, PenaltyWeights, RateLimits,
    Scenario,
};

pub const PLANAR_HEIGHT: f64 = 0.3;
pub const LINK_RADIUS: f64 = 0.03;
const Z: [f64; 3] = [0.0, 0.0, 1.0];
const Y: [f64; 3] = [0.0, 1.0, 0.0];
const X: [f64; 3] = [1.0, 0.0, 0.0];

/// Upright cuboid on the table at `(x, y)` with yaw `yaw`.
pub fn upright(x: f64, y: f64, yaw: f64) -> Pose {
    Pose {
        position: [x, y, 0.1],
        orientation: [0.0, 0.0, yaw],
    }
}

/// Horizontal arm with base at `(x, y)`, initial heading `heading` and the
/// given link lengths.
pub fn planar_arm(name: &str, base: [f64; 2], heading: f64, links: &[f64], rest: Vec<f64>) -> ManipulatorSpec {
    let mut joints = Vec::new();
    let mut bodies = Vec::new();
    for (k, &len) in links.iter().enumerate() {
        let origin = if k == 0 {
            Pose {
                position: [base[0], base[1], PLANAR_HEIGHT],
                orientation: [0.0, 0.0, heading],
            }
        } else {
            Pose::from_translation(links[k - 1], 0.0, 0.0)
        };
        let limits = if k == 0 { [-PI, PI] } else { [-2.8, 2.8] };
        joints.push(Joint::revolute(Z, origin, limits));
        bodies.push(LinkPrimitive {
            link: k,
            primitive: CollisionPrimitive::capsule([0.0; 3], [len, 0.0, 0.0], LINK_RADIUS),
        });
    }
    let last = *links.last().expect("at least one link");
    ManipulatorSpec {
        name: name.into(),
        chain: KinematicChain {
            joints,
            tool: Pose::from_translation(last, 0.0, 0.0),
            collision_bodies: bodies,
        },
        rest,
        gripper_offset: Pose::from_translation(0.0, 0.0, PLANAR_HEIGHT - 0.1),
        interactive: None,
    }
}

/// Six-joint spatial arm (yaw base, three pitch joints, wrist yaw and roll)
/// whose rest configuration points the tool straight down in front of the
/// base.
pub fn spatial_arm(name: &str, base: [f64; 2], heading: f64) -> ManipulatorSpec {
    let joints = vec![
        Joint::revolute(
            Z,
            Pose {
                position: [base[0], base[1], 0.05],
                orientation: [0.0, 0.0, heading],
            },
            [-PI, PI],
        ),
        Joint::revolute(Y, Pose::from_translation(0.0, 0.0, 0.1), [-2.5, 2.5]),
        Joint::revolute(Y, Pose::from_translation(0.0, 0.0, 0.35), [-2.8, 2.8]),
        Joint::revolute(Y, Pose::from_translation(0.0, 0.0, 0.3), [-2.8, 2.8]),
        Joint::revolute(Z, Pose::from_translation(0.0, 0.0, 0.08), [-PI, PI]),
        Joint::revolute(X, Pose::identity(), [-PI, PI]),
    ];
    let bodies = vec![
        LinkPrimitive {
            link: 1,
            primitive: CollisionPrimitive::capsule([0.0; 3], [0.0, 0.0, 0.35], 0.04),
        },
        LinkPrimitive {
            link: 2,
            primitive: CollisionPrimitive::capsule([0.0; 3], [0.0, 0.0, 0.3], 0.035),
        },
        LinkPrimitive {
            link: 5,
            primitive: CollisionPrimitive::sphere([0.0, 0.0, 0.03], 0.03),
        },
    ];
    ManipulatorSpec {
        name: name.into(),
        chain: KinematicChain {
            joints,
            tool: Pose::from_translation(0.0, 0.0, 0.06),
            collision_bodies: bodies,
        },
        rest: vec![0.0, -0.3, 1.8, PI - 1.5, 0.0, 0.0],
        gripper_offset: Pose {
            position: [0.0, 0.0, 0.15],
            orientation: [PI, 0.0, 0.0],
        },
        interactive: None,
    }
}

/// Starting penalty weight of the presets; six tenfold rounds end at 1e7.
const PRESET_PENALTY: f64 = 10.0;

fn base_scenario(robots: Vec<ManipulatorSpec>, objects: Vec<ObjectSpec>, segments: usize, duration: f64) -> Scenario {
    Scenario {
        robots,
        objects,
        obstacles: Vec::new(),
        horizon: Horizon { duration, segments },
        objective: ObjectiveWeights::default(),
        penalties: PenaltyWeights::uniform(PRESET_PENALTY),
        extensions: Extensions::default(),
        solver: SolverConfig {
            penalty_ramp: Some(PenaltyRamp {
                factor: 10.0,
                rounds: 6,
            }),
            ..SolverConfig::default()
        },
    }
}

/// `k` six-joint arms spaced along the x axis and one cuboid carried from
/// the left end of the line to the right end; 9 segments (10 nodes).
pub fn arm_line(k: usize) -> Scenario {
    const SPACING: f64 = 0.6;
    let robots = (0..k)
        .map(|i| spatial_arm(&format!("arm{i}"), [SPACING * i as f64, 0.0], FRAC_PI_2))
        .collect();
    let last = SPACING * (k.max(1) - 1) as f64;
    let object = ObjectSpec::cuboid("box", upright(-0.15, 0.3, 0.0), upright(last + 0.15, 0.3, 0.0));
    let mut s = base_scenario(robots, vec![object], 9, 9.0);
    // Rounds at 1e6 and above stall on the gradient tolerance once two or
    // more arms share the object.
    s.solver.penalty_ramp = Some(PenaltyRamp {
        factor: 10.0,
        rounds: 4,
    });
    s
}

/// One planar arm moving one cuboid a quarter turn around its base.
pub fn planar_pick_place() -> Scenario {
    let arm = planar_arm("arm", [0.0, 0.0], 0.0, &[0.3, 0.25, 0.2], vec![0.0, 1.2, 1.0]);
    let object = ObjectSpec::cuboid("box", upright(0.5, -0.25, 0.0), upright(0.05, 0.55, FRAC_PI_2));
    base_scenario(vec![arm], vec![object], 9, 9.0)
}

/// Two short arms one meter apart. The start is only reachable by `armA`
/// and the goal only by `armB`, so the object must be handed over.
pub fn handover() -> Scenario {
    let a = planar_arm("armA", [0.0, 0.0], 0.0, &[0.3, 0.25, 0.2], vec![0.0, 1.2, 1.0]);
    let b = planar_arm("armB", [1.0, 0.0], FRAC_PI_2, &[0.3, 0.25, 0.2], vec![0.0, -1.2, -1.0]);
    let object = ObjectSpec::cuboid("box", upright(-0.5, 0.15, 0.0), upright(1.5, 0.15, -1.2));
    let mut s = base_scenario(vec![a, b], vec![object], 9, 9.0);
    // Hold-then-goal leaves armA holding the object until the last node.
    s.solver.initialization = InitStrategy::Linear;
    s
}

/// [`handover`] with a long `armB` that reaches the start on its own. Its
/// rest configuration puts the tool at the object start.
pub fn handover_long_reach() -> Scenario {
    let mut s = handover();
    s.robots[1] = planar_arm(
        "armB",
        [1.0, 0.0],
        FRAC_PI_2,
        &[0.8, 0.6, 0.5],
        vec![2.174, -0.912, -0.692],
    );
    s
}

/// [`handover`] with weight-rate limits of ±½ per second on one-second
/// segments.
pub fn handover_rate_limited() -> Scenario {
    let mut s = handover();
    s.horizon = Horizon {
        duration: 14.0,
        segments: 14,
    };
    s.extensions.weight_rate_limits = Some(RateLimits {
        upper: 0.5,
        lower: -0.5,
    });
    // The cubic penalty needs a stiffer weight to hold the limit to 1e-6.
    s.penalties.weight_rate = 1e3 * PRESET_PENALTY;
    s.solver.initialization = InitStrategy::MultiObject;
    s
}

/// One planar arm moving two cuboids over 9 segments.
pub fn two_objects() -> Scenario {
    let arm = planar_arm("arm", [0.0, 0.0], 0.0, &[0.3, 0.25, 0.2], vec![0.0, 1.2, 1.0]);
    let first = ObjectSpec::cuboid("boxA", upright(0.55, -0.15, 0.0), upright(-0.2, 0.5, 0.0));
    let second = ObjectSpec::cuboid("boxB", upright(0.45, 0.25, 0.0), upright(-0.5, -0.1, 0.0));
    base_scenario(vec![arm], vec![first, second], 9, 9.0)
}

/// Object acceleration weight of the schedule-shaping continuation.
pub const SHAPING_ACCEL_WEIGHT: f64 = 10.0;

/// `scenario` with the object acceleration term enabled for every object.
pub fn with_object_acceleration(mut scenario: Scenario, weight: f64) -> Scenario {
    scenario.objective.object_accel_weights = vec![weight; scenario.objects.len()];
    scenario
}

/// Two arms and three cuboids over 13 segments, seeded with the windowed
/// multi-object initialization.
pub fn three_objects() -> Scenario {
    let a = planar_arm("armA", [0.0, 0.0], 0.0, &[0.3, 0.25, 0.2], vec![0.0, 1.2, 1.0]);
    let b = planar_arm("armB", [0.9, 0.0], PI, &[0.3, 0.25, 0.2], vec![0.0, -1.2, -1.0]);
    let objects = vec![
        ObjectSpec::cuboid("boxA", upright(0.3, 0.45, 0.0), upright(0.6, 0.45, 0.0)),
        ObjectSpec::cuboid("boxB", upright(0.3, -0.45, 0.0), upright(0.6, -0.45, 0.0)),
        ObjectSpec::cuboid("boxC", upright(-0.4, 0.1, 0.0), upright(1.3, 0.1, 0.0)),
    ];
    let mut s = base_scenario(vec![a, b], objects, 13, 13.0);
    s.solver.initialization = InitStrategy::MultiObject;
    s
}

/// A drawer modeled as a one-joint prismatic manipulator holding a cuboid;
/// a planar arm pulls the drawer open by its handle and lifts the cuboid out.
pub fn drawer() -> Scenario {
    let drawer = ManipulatorSpec {
        name: "drawer".into(),
        chain: KinematicChain {
            joints: vec![Joint::prismatic(
                [-1.0, 0.0, 0.0],
                Pose::from_translation(0.95, 0.0, 0.0),
                [0.0, 0.35],
            )],
            tool: Pose::from_translation(0.0, 0.0, 0.1),
            collision_bodies: Vec::new(),
        },
        rest: vec![0.0],
        gripper_offset: Pose::identity(),
        interactive: Some(InteractiveSpec {
            handle: Pose::from_translation(-0.25, 0.0, PLANAR_HEIGHT),
            handle_length: 0.1,
        }),
    };
    let arm = planar_arm("arm", [0.0, 0.0], 0.0, &[0.3, 0.25, 0.2], vec![0.0, 1.2, 1.0]);
    let object = ObjectSpec::cuboid("box", upright(0.95, 0.0, 0.0), upright(0.1, 0.5, 0.0));
    base_scenario(vec![arm, drawer], vec![object], 12, 12.0)
}

/// [`drawer`] with every optional term switched on: orientation-resolved
/// grasp weights, weight-rate limits and object acceleration. Every residual
/// family appears in its problem.
pub fn extensions() -> Scenario {
    let mut s = drawer();
    s.extensions.orientation_weights = true;
    s.extensions.weight_rate_limits = Some(RateLimits {
        upper: 0.5,
        lower: -0.5,
    });
    with_object_acceleration(s, 1.0)
}

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 10] = [
    "pick-place",
    "handover",
    "handover-long-reach",
    "handover-rate-limited",
    "two-objects",
    "three-objects",
    "drawer",
    "extensions",
    "arm-line-1",
    "arm-line-5",
];

pub fn by_name(name: &str) -> Option<Scenario> {
    Some(match name {
        "pick-place" => planar_pick_place(),
        "handover" => handover(),
        "handover-long-reach" => handover_long_reach(),
        "handover-rate-limited" => handover_rate_limited(),
        "two-objects" => two_objects(),
        "three-objects" => three_objects(),
        "drawer" => drawer(),
        "extensions" => extensions(),
        other => {
            let k: usize = other.strip_prefix("arm-line-")?.parse().ok()?;
            if k == 0 {
                return None;
            }
            arm_line(k)
        }
    })
}
