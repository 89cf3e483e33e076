//! Benchmarks for the hot paths: cone enumeration, a polygon sweep, and the
//! pruned exact sweep of the window model.

use adaptive_chsh_core::chsh::optimize_chsh;
use adaptive_chsh_core::composite::max_tensor;
use adaptive_chsh_core::dd;
use adaptive_chsh_core::epsilon::{build_epsilon_model, post_measurement_sweep};
use adaptive_chsh_core::gpt::polygon_system;
use adaptive_chsh_core::scalar::rat;
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn bench_window_enumeration(c: &mut Criterion) {
    let model = build_epsilon_model(rat(1, 16)).unwrap();
    c.bench_function("enumerate window state cone 1/16", |b| {
        b.iter(|| dd::enumerate(black_box(&model.state_h)))
    });
}

fn bench_heptagon_sweep(c: &mut Criterion) {
    let p = polygon_system(7).unwrap();
    let joint = max_tensor(&p, &p).unwrap();
    c.bench_function("heptagon maximal tensor sweep", |b| {
        b.iter(|| optimize_chsh(black_box(&joint)).unwrap())
    });
}

fn bench_pruned_window_sweep(c: &mut Criterion) {
    let model = build_epsilon_model(rat(1, 16)).unwrap();
    c.bench_function("pruned window sweep 1/16", |b| {
        b.iter(|| post_measurement_sweep(black_box(&model), true))
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_window_enumeration, bench_heptagon_sweep, bench_pruned_window_sweep
}
criterion_main!(benches);
