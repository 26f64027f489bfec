//! Microbenchmarks for the per-step hot path.
//!
//! Run with `cargo bench -p srkw-bench`. The figures to watch are the
//! single-step costs: they bound the throughput of every estimator and
//! expose regressions in the stage loops long before a full study would.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use srkw::families;
use srkw::integrator::{EvalCounters, Stepper};
use srkw::montecarlo;
use srkw::problems;
use srkw::rng::{sample_increments_into, RandomStream, WeakIncrements};
use srkw::tableau::compile;

fn step_benches(c: &mut Criterion) {
    let dri1 = compile(&families::dri1());
    let euler = compile(&families::euler());
    let h = 0.01;

    let mut group = c.benchmark_group("step");
    for (label, problem) in [
        ("sinh_m1", problems::problem_sinh().sde),
        ("wiener10_m10", problems::problem_10_wiener().sde),
    ] {
        for (scheme, plan) in [("dri1", &dri1), ("euler", &euler)] {
            group.bench_with_input(BenchmarkId::new(scheme, label), &problem, |b, p| {
                let mut stepper = Stepper::new(plan, p);
                let mut counters = EvalCounters::default();
                let mut stream = RandomStream::new(42, 0);
                let mut inc = WeakIncrements::default();
                let mut next = vec![0.0; p.d];
                // step from the fixed initial state: carrying the state
                // would eventually overflow the unbounded test problems
                b.iter(|| {
                    sample_increments_into(&mut stream, p.m, h, &mut inc);
                    stepper
                        .step(p.t0, &p.x0, &inc, &mut counters, &mut next)
                        .unwrap();
                    black_box(next[0])
                });
            });
        }
    }
    group.finish();

    let mut group = c.benchmark_group("increments");
    for m in [1usize, 2, 10] {
        group.bench_function(BenchmarkId::from_parameter(m), |b| {
            let mut stream = RandomStream::new(7, 0);
            let mut inc = WeakIncrements::default();
            b.iter(|| {
                sample_increments_into(&mut stream, m, h, &mut inc);
                black_box(inc.ihat[0])
            });
        });
    }
    group.finish();

    let mut group = c.benchmark_group("estimate");
    group.sample_size(10);
    group.bench_function("dri1_gbm_h2-2_m5000", |b| {
        let problem = problems::problem_gbm(1.5, 0.1);
        b.iter(|| montecarlo::estimate(&dri1, &problem, 0.25, 5_000, 3, 5).unwrap());
    });
    group.finish();
}

criterion_group!(benches, step_benches);
criterion_main!(benches);
