use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use tripod_bench::{oracle_grid, reduced_grid, slow_window, splitting_boundary};
use tripod_core::algebra::{AtomState, C64};
use tripod_core::analytic::{fit_constants, Family};
use tripod_core::oracle::{exp_step, propagate_full};
use tripod_core::reduced::propagate_with;
use tripod_core::SnapshotPlan;

fn reduced(c: &mut Criterion) {
    let b = splitting_boundary(1.0);
    let mut group = c.benchmark_group("reduced");
    for h in [0.02, 0.01] {
        let g = reduced_grid(h, 10.0);
        group.bench_with_input(BenchmarkId::from_parameter(h), &g, |bench, g| {
            bench.iter(|| propagate_with(&b, g, SnapshotPlan::every(g.n_steps())).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let b = splitting_boundary(20.0);
    let g = oracle_grid();
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("w0=20", |bench| bench.iter(|| propagate_full(&b, &g, 1.0).unwrap()));
    group.finish();
}

fn atom(c: &mut Criterion) {
    let f = [C64::new(0.3, 0.0), C64::new(0.1, 0.2), C64::new(-0.4, 0.0)];
    let a = AtomState::basis(1);
    c.bench_function("exp_step", |bench| bench.iter(|| exp_step(black_box(&f), black_box(&a), 0.05)));
}

fn fit(c: &mut Criterion) {
    let w = slow_window();
    c.bench_function("fit_slow", |bench| bench.iter(|| fit_constants(black_box(&w), Family::Slow).unwrap()));
}

criterion_group!(benches, reduced, oracle, atom, fit);
criterion_main!(benches);
