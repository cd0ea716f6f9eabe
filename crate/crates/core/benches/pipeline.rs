use carpet_core::conjugate::compute_conjugate;
use carpet_core::exec::Exec;
use carpet_core::geometry::generate_standard_carpet;
use carpet_core::pipeline::{run, solve, RunConfig};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn conjugate(c: &mut Criterion) {
    let config = generate_standard_carpet(3).unwrap();
    let (solved, _) = solve(&config, &RunConfig::default()).unwrap();
    let mut group = c.benchmark_group("conjugate_n3");
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        group.bench_function(name, |b| {
            b.iter(|| {
                compute_conjugate(&solved.solution, &solved.graph, 3, 1e-9, exec).unwrap()
            })
        });
    }
    group.finish();
}

fn full_run(c: &mut Criterion) {
    let config = generate_standard_carpet(3).unwrap();
    let mut group = c.benchmark_group("run_n3");
    group.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        let rc = RunConfig {
            exec,
            ..RunConfig::default()
        };
        group.bench_function(name, |b| b.iter(|| run(black_box(&config), &rc).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, conjugate, full_run);
criterion_main!(benches);
