use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gwp_core::nc;
use gwp_core::scalar::rational;

fn enumerate(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_nc");
    for n in [8, 10, 12] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| nc::enumerate_nc(black_box(n)).unwrap())
        });
    }
    group.finish();
}

fn mobius(c: &mut Criterion) {
    let all = nc::enumerate_nc(10).unwrap();
    c.bench_function("mobius_to_top_nc10", |b| {
        b.iter(|| all.iter().map(nc::mobius_to_top).count())
    });
}

fn transforms(c: &mut Criterion) {
    let m: Vec<_> = (1..=10).map(|i| rational(i * i - 7, i + 2)).collect();
    c.bench_function("moments_to_cumulants_10", |b| {
        b.iter(|| nc::moments_to_cumulants(black_box(&m)).unwrap())
    });
}

criterion_group!(benches, enumerate, mobius, transforms);
criterion_main!(benches);
