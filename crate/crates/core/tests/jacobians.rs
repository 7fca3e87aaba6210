use dtamp::check::{check_jacobians, CheckOptions};
use dtamp::constraints::Family;
use dtamp::scene::presets;
use dtamp::solver::ScenarioProblem;

fn run(name: &str, states: usize) {
    run_scenario(name, presets::by_name(name).unwrap(), states);
}

fn run_scenario(name: &str, scenario: dtamp::scene::Scenario, states: usize) {
    let sp = ScenarioProblem::build(scenario).unwrap();
    let opts = CheckOptions {
        states,
        ..CheckOptions::default()
    };
    let report = check_jacobians(&sp, &opts).unwrap();
    for f in &report.families {
        println!("{name} {:<24} {:.3e} {}", f.family.name(), f.worst, f.block);
    }
    assert!(report.passed(1e-5), "{name}: {:?}", report.failing(1e-5));
}

#[test]
fn pick_place_blocks_match_differences() {
    run("pick-place", 10);
}

#[test]
fn handover_blocks_match_differences() {
    run("handover", 3);
}

#[test]
fn drawer_blocks_match_differences() {
    run("drawer", 3);
}

#[test]
fn spatial_arm_blocks_match_differences() {
    run("arm-line-1", 3);
}

#[test]
fn extension_blocks_match_differences() {
    let mut s = presets::drawer();
    s.extensions.orientation_weights = true;
    run_scenario("drawer-oriented", s, 2);
    run("handover-rate-limited", 2);
    run("three-objects", 1);
}

#[test]
fn perturbed_family_is_reported() {
    let sp = ScenarioProblem::build(presets::planar_pick_place()).unwrap();
    let opts = CheckOptions {
        states: 1,
        perturb: Some(Family::Velocity),
        ..CheckOptions::default()
    };
    let report = check_jacobians(&sp, &opts).unwrap();
    assert_eq!(report.failing(1e-5), vec![Family::Velocity]);
}
