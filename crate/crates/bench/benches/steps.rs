use std::hint::black_box;

use bregman_bench::{lstsq_problem, preset_runs, step_fixture};
use bregman_opt::oracle::integrate_el;
use bregman_opt::problems::{make_ill_conditioned, make_log_barrier};
use bregman_opt::{run, sweep_with, Axis, BregmanConfig, Execution, IntegratorKind, ProblemKind, RunConfig};
use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};

fn single_step(c: &mut Criterion) {
    let problem = lstsq_problem();
    let mut group = c.benchmark_group("step/lstsq-400x200");
    for cfg in [BregmanConfig::poly(6.0, 0.1).unwrap(), BregmanConfig::expo(0.5, 0.1).unwrap()] {
        for kind in IntegratorKind::ALL {
            let (it, state, grad) = step_fixture(&problem, cfg, kind, 1e-3);
            let id = BenchmarkId::new(cfg.label(), kind);
            group.bench_function(id, |b| {
                b.iter_batched_ref(
                    || (state.clone(), grad.clone(), vec![0.0; grad.len()]),
                    |(s, g, dq)| {
                        let pending = it.begin(s, g, dq, &problem).unwrap();
                        it.finish(s, &pending, g, dq, false).unwrap();
                    },
                    BatchSize::SmallInput,
                )
            });
        }
    }
    group.finish();
}

fn full_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("run");
    for kind in [ProblemKind::LogBarrier, ProblemKind::Entropy, ProblemKind::LeastSquares] {
        for (label, rc) in preset_runs(kind) {
            let rc = rc.max_iters(10_000);
            group.bench_function(BenchmarkId::new(label, kind.as_str()), |b| b.iter(|| black_box(run(&rc).unwrap())));
        }
    }
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let cfg = BregmanConfig::poly(4.0, 1.0).unwrap();
    let base = RunConfig::new(make_log_barrier(), vec![2.0, 2.0], cfg, IntegratorKind::Htvi, 0.1)
        .delta(1e-8)
        .max_iters(2_000);
    let axes = [Axis::log("C", 1e-4, 1e2, 16).unwrap(), Axis::log("h", 1e-3, 1.0, 16).unwrap()];
    let mut group = c.benchmark_group("sweep/16x16");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| b.iter(|| black_box(sweep_with(&axes, &base, exec).unwrap())));
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let problem = make_ill_conditioned();
    let cfg = BregmanConfig::poly(6.0, 1e-3).unwrap();
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("rk4/illcond/t=1..5/h=1e-4", |b| {
        b.iter(|| black_box(integrate_el(&cfg, &problem, &[1.0; 3], 1.0, 5.0, 1e-4).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, single_step, full_runs, sweeps, oracle);
criterion_main!(benches);
