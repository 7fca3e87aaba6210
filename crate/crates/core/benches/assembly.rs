use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dtamp::scene::{initialize, presets};
use dtamp::solver::assemble::{assemble, objective, Execution};
use dtamp::solver::ScenarioProblem;

fn modes() -> Vec<(&'static str, Execution)> {
    #[cfg_attr(not(feature = "parallel"), allow(unused_mut))]
    let mut out = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    out.push(("parallel", Execution::Parallel));
    out
}

fn bench_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    for name in ["pick-place", "three-objects", "arm-line-3", "arm-line-5"] {
        let sp = ScenarioProblem::build(presets::by_name(name).unwrap()).unwrap();
        let x = initialize(sp.scenario(), sp.layout());
        for (mode, execution) in modes() {
            group.bench_with_input(BenchmarkId::new(mode, name), &x, |b, x| {
                b.iter(|| assemble(&sp.problem, x, 1.0, execution).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_objective(c: &mut Criterion) {
    let mut group = c.benchmark_group("objective");
    for name in ["three-objects", "arm-line-5"] {
        let sp = ScenarioProblem::build(presets::by_name(name).unwrap()).unwrap();
        let x = initialize(sp.scenario(), sp.layout());
        for (mode, execution) in modes() {
            group.bench_with_input(BenchmarkId::new(mode, name), &x, |b, x| {
                b.iter(|| objective(&sp.problem, x, 1.0, execution).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_assembly, bench_objective);
criterion_main!(benches);
