use dtamp::constraints::manifold::{manifold_distance_1d, Line, Toy1d};
use dtamp::constraints::{path_samples, Family, PenaltyKind, ResidualBlock, RowSink, Sample, Term};
use dtamp::scene::{initialize, object_indices, presets, presolve, Scenario};
use dtamp::solver::assemble::{assemble, objective, Execution};
use dtamp::solver::{solve, solve_with, Problem, ScenarioProblem, SolverConfig, Termination};
use dtamp::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `x[0..6] − target` at every sample.
struct Offset {
    target: [f64; 6],
    shift: usize,
}

impl Term for Offset {
    fn rows(&self) -> usize {
        6
    }

    fn evaluate(&self, x: &[f64], _at: &Sample, out: &mut RowSink<'_>) {
        for k in 0..6 {
            let v = x.get(k + self.shift).copied().unwrap_or(0.0);
            out.set(k, if v.is_nan() { v } else { v - self.target[k] });
            out.add(k, k + self.shift, 1.0);
        }
    }
}

fn offset_problem(shift: usize) -> Problem {
    let samples = path_samples(1, 1.0);
    assert_eq!(samples.len(), 3);
    Problem {
        variable_count: 6,
        blocks: vec![ResidualBlock::new(
            Family::Position,
            "offset",
            PenaltyKind::Equality,
            1.0,
            samples,
            Offset {
                target: [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
                shift,
            },
        )],
        pinned: Vec::new(),
    }
}

#[test]
fn empty_problem_assembles_to_nothing() {
    let p = Problem {
        variable_count: 4,
        blocks: Vec::new(),
        pinned: Vec::new(),
    };
    let a = assemble(&p, &[0.0; 4], 1.0, Execution::Sequential).unwrap();
    assert!(a.residual.is_empty());
    assert_eq!(a.jacobian.nrows(), 0);
    assert_eq!(a.jacobian.val().len(), 0);
}

#[test]
fn one_block_three_samples_six_rows_each() {
    let a = assemble(&offset_problem(0), &[0.0; 6], 1.0, Execution::Sequential).unwrap();
    assert_eq!(a.residual.len(), 18);
    assert_eq!(a.jacobian.nrows(), 18);
    assert_eq!(a.residual[..6], [-1.0, -2.0, -3.0, -4.0, -5.0, -6.0]);
}

#[test]
fn index_outside_the_layout_is_rejected() {
    let err = assemble(&offset_problem(1), &[0.0; 6], 1.0, Execution::Sequential).unwrap_err();
    assert!(
        matches!(err, Error::IndexOutOfLayout { ref block, index: 6, len: 6 } if block == "offset"),
        "{err}"
    );
}

#[test]
fn non_finite_start_names_the_block() {
    let mut x = [0.0; 6];
    x[2] = f64::NAN;
    let err = solve(&offset_problem(0), &x, &SolverConfig::default(), &[]).unwrap_err();
    assert_eq!(err, Error::NonFinite { block: "offset".into() });
}

#[test]
fn linear_residual_converges_in_one_step() {
    let r = solve(&offset_problem(0), &[0.0; 6], &SolverConfig::default(), &[]).unwrap();
    assert!(r.termination.converged());
    for (v, t) in r.x.iter().zip([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]) {
        assert!((v - t).abs() < 1e-6);
    }
}

fn random_state(sp: &ScenarioProblem, seed: u64, spread: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    initialize(sp.scenario(), sp.layout())
        .into_iter()
        .map(|v| v + rng.random_range(-spread..spread))
        .collect()
}

/// `‖Jᵀr − ∇fd‖∞ / max(1, ‖∇fd‖∞)` of `½‖r‖²`.
fn gradient_error(problem: &Problem, x: &[f64], scale: f64) -> f64 {
    let g = assemble(problem, x, scale, Execution::Sequential).unwrap().gradient();
    let h = 1e-6;
    let mut xp = x.to_vec();
    let mut worst = 0.0f64;
    let mut norm = 1.0f64;
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let fp = objective(problem, &xp, scale, Execution::Sequential).unwrap();
        xp[i] = x[i] - h;
        let fm = objective(problem, &xp, scale, Execution::Sequential).unwrap();
        xp[i] = x[i];
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((g[i] - fd).abs());
        norm = norm.max(fd.abs());
    }
    worst / norm
}

#[test]
fn gradient_matches_finite_differences_at_random_states() {
    for name in ["pick-place", "handover"] {
        let sp = ScenarioProblem::build(presets::by_name(name).unwrap()).unwrap();
        for seed in 0..2 {
            let x = random_state(&sp, seed, 0.1);
            let err = gradient_error(&sp.problem, &x, 1.0);
            assert!(err <= 1e-5, "{name} seed {seed}: {err:e}");
        }
    }
}

#[test]
fn gradient_matches_finite_differences_at_solver_iterates() {
    let sp = ScenarioProblem::build(presets::planar_pick_place()).unwrap();
    let init = initialize(sp.scenario(), sp.layout());
    let mut config = sp.scenario().solver.clone();
    config.penalty_ramp = None;
    for iterations in [3, 6, 9] {
        config.max_iterations = iterations;
        let r = solve(&sp.problem, &init, &config, &[]).unwrap();
        let err = gradient_error(&sp.problem, &r.x, 1.0);
        assert!(err <= 1e-4, "after {iterations} iterations: {err:e}");
    }
}

fn short_run(s: Scenario, iterations: usize, execution: Execution) -> dtamp::solver::SolveResult {
    let sp = ScenarioProblem::build(s).unwrap();
    let init = initialize(sp.scenario(), sp.layout());
    let mut config = sp.scenario().solver.clone();
    config.max_iterations = iterations;
    config.penalty_ramp = None;
    solve_with(&sp.problem, &init, &config, &[], execution).unwrap()
}

#[test]
fn identical_inputs_give_bit_identical_histories() {
    let a = short_run(presets::handover(), 40, Execution::Sequential);
    let b = short_run(presets::handover(), 40, Execution::Sequential);
    assert_eq!(a.history, b.history);
    assert_eq!(a.x, b.x);
}

#[cfg(feature = "parallel")]
#[test]
fn parallel_and_sequential_evaluation_agree_bitwise() {
    let a = short_run(presets::handover(), 25, Execution::Sequential);
    let b = short_run(presets::handover(), 25, Execution::Parallel);
    assert_eq!(a.history, b.history);
    assert_eq!(a.x, b.x);
}

#[test]
fn frozen_coordinates_never_move() {
    let sp = ScenarioProblem::build(presets::two_objects()).unwrap();
    let init = random_state(&sp, 7, 0.05);
    let frozen = object_indices(sp.layout());
    let mut config = sp.scenario().solver.clone();
    config.max_iterations = 15;
    let r = solve(&sp.problem, &init, &config, &frozen).unwrap();
    assert!(r.iterations > 0);
    for &i in frozen.iter().chain(&sp.problem.pinned) {
        assert_eq!(r.x[i].to_bits(), init[i].to_bits());
    }
    assert_ne!(r.x, init);
}

#[test]
fn accepted_steps_never_increase_the_objective() {
    let sp = ScenarioProblem::build(presets::planar_pick_place()).unwrap();
    let init = initialize(sp.scenario(), sp.layout());
    let r = solve(&sp.problem, &init, &sp.scenario().solver, &[]).unwrap();
    assert!(r.termination.converged(), "{:?}", r.termination);
    for pair in r.history.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.round == b.round {
            assert!(
                b.objective <= a.objective,
                "round {} iteration {}",
                b.round,
                b.iteration
            );
            if !b.accepted {
                assert_eq!(b.objective, a.objective);
            }
        }
    }
}

#[test]
fn stationary_start_terminates_immediately() {
    let mut s = presets::planar_pick_place();
    s.objects[0].goal_pose = s.objects[0].start_pose;
    s.solver = SolverConfig::default();
    let sp = ScenarioProblem::build(s).unwrap();
    let mut x = initialize(sp.scenario(), sp.layout());
    for i in sp.layout().pairs[0].weight.range() {
        x[i] = 0.0;
    }
    // Upright is the +z face placement.
    for (d, r) in sp.layout().objects[0].rest.iter().enumerate() {
        for i in r.range() {
            x[i] = if d == 4 { 1.0 } else { 0.0 };
        }
    }
    let r = solve(&sp.problem, &x, &sp.scenario().solver, &[]).unwrap();
    assert!(r.iterations <= 2, "{} iterations", r.iterations);
    assert!(r.termination.converged());
    assert!(r.history.iter().all(|h| h.step_norm == 0.0));
    assert_eq!(r.x, x);
}

/// Piecewise manifold distance of the toy, one constant weight per segment.
fn toy_distance(toy: &Toy1d, x: &[f64]) -> f64 {
    let m = toy.manipulator_spline(x).unwrap();
    let p = toy.object_spline(x).unwrap();
    let dt = toy.segment_duration();
    (0..toy.segments)
        .map(|s| {
            let w = x[toy.weight.index(s)];
            manifold_distance_1d(&m, &p, w, [s as f64 * dt, (s + 1) as f64 * dt])
        })
        .sum()
}

#[test]
fn toy_transport_converges_to_full_weight() {
    let toy = Toy1d::new(4, 1.0);
    let problem = toy.transport_problem(1e3);
    // Object must travel from 0 to 1; everything else starts idle.
    let mut x = toy.matched_state(Line { start: 0.0, slope: 0.0 }, 0.5);
    x[toy.object.value_index(toy.segments, 0)] = 1.0;
    let config = SolverConfig {
        max_iterations: 200,
        ..SolverConfig::default()
    };
    let r = solve(&problem, &x, &config, &[]).unwrap();
    assert!(r.termination.converged(), "{:?}", r.termination);
    // Segments that move the object carry it with full weight; the weight
    // is free where the object rests.
    let mut moving = 0;
    for s in 0..toy.segments {
        let w = r.x[toy.weight.index(s)];
        let travel = r.x[toy.object.value_index(s + 1, 0)] - r.x[toy.object.value_index(s, 0)];
        if travel.abs() > 1e-3 {
            moving += 1;
            assert!((w - 1.0).abs() < 1e-3, "segment {s}: w = {w}, travel {travel}");
        }
    }
    assert!(moving > 0);
    let d = toy_distance(&toy, &r.x);
    assert!(d <= 1e-6, "distance {d:e}");
    assert_eq!(r.x[toy.object.value_index(toy.segments, 0)], 1.0);
}

/// Minimum manifold distance over the manipulator trajectory for a fixed
/// weight and an object moving `displacement` at constant speed.
fn minimized_distance(w: f64, displacement: f64) -> f64 {
    let toy = Toy1d::new(4, 1.0);
    let problem = toy.fixed_weight_problem().unwrap();
    let line = Line {
        start: 0.0,
        slope: displacement,
    };
    let mut x = toy.matched_state(line, w);
    // Start the manipulator away from the object.
    for n in 0..=toy.segments {
        x[toy.manipulator.value_index(n, 0)] += 0.3;
    }
    let r = solve(&problem, &x, &SolverConfig::default(), &[]).unwrap();
    assert!(r.termination.converged(), "{:?}", r.termination);
    let m = toy.manipulator_spline(&r.x).unwrap();
    manifold_distance_1d(&m, &line, w, [0.0, 1.0])
}

#[test]
fn fixed_weight_grid_reproduces_the_manifold() {
    for w in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let d = minimized_distance(w, 0.0);
        assert!(d <= 1e-6, "w {w}, no displacement: {d:e}");
    }
    for displacement in [0.25, 0.5, 1.0] {
        let d = minimized_distance(1.0, displacement);
        assert!(d <= 1e-6, "w 1, displacement {displacement}: {d:e}");
    }
    let matched = Line { start: 0.0, slope: 1.0 };
    assert!((manifold_distance_1d(&matched, &matched, 0.5, [0.0, 1.0]) - 0.25).abs() <= 1e-6);
    let d = minimized_distance(0.5, 1.0);
    assert!((0.01..=0.25).contains(&d), "{d}");
}

#[test]
fn presolve_leaves_objects_untouched_and_lowers_the_objective() {
    let sp = ScenarioProblem::build(presets::two_objects()).unwrap();
    let init = dtamp::scene::initialize_multi_object(sp.scenario(), sp.layout()).unwrap();
    let config = &sp.scenario().solver;
    assert_eq!(presolve(&sp, &init, config, 0).unwrap(), init);
    let x = presolve(&sp, &init, config, 10).unwrap();
    for i in object_indices(sp.layout()) {
        assert_eq!(x[i].to_bits(), init[i].to_bits());
    }
    let before = objective(&sp.problem, &init, 1.0, Execution::Sequential).unwrap();
    let after = objective(&sp.problem, &x, 1.0, Execution::Sequential).unwrap();
    assert!(after <= before, "{after} > {before}");
}

#[test]
fn max_iterations_zero_returns_the_start() {
    let r = short_run(presets::planar_pick_place(), 0, Execution::Sequential);
    assert_eq!(r.termination, Termination::MaxIterations);
    assert_eq!(r.iterations, 0);
    assert_eq!(r.history.len(), 1);
}
