//! Compares the worker-pool batch runner against the sequential fallback on
//! a small spade workload. With the `parallel` feature disabled the two paths
//! are the same code, which makes the overhead of the pool visible when it is
//! enabled.

use criterion::{criterion_group, criterion_main, Criterion};
use spadepso::optimizer::{run_many, run_many_serial, OptimizerConfig, SpadeConfig};
use spadepso::problems::make_objective;

fn batch_benches(c: &mut Criterion) {
    let objective = make_objective("sphere", 10, 1, None).unwrap();
    let config = OptimizerConfig::Spade(SpadeConfig::protocol(2000));
    let mut group = c.benchmark_group("spade_batch_4_runs_2000_evals");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| run_many_serial(&config, objective.as_ref(), 1, 4).unwrap())
    });
    group.bench_function("worker_pool", |b| {
        b.iter(|| run_many(&config, objective.as_ref(), 1, 4).unwrap())
    });
    group.finish();
}

criterion_group!(benches, batch_benches);
criterion_main!(benches);
