use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use msk_bench::coverage_instance;
use msk_core::{enum_greedy, greedy, greedy_lazy};

fn bench_greedy_variants(c: &mut Criterion) {
    let mut group = c.benchmark_group("greedy");
    for n in [64usize, 256] {
        let inst = coverage_instance(n, 11);
        group.bench_with_input(BenchmarkId::new("plain", n), &inst, |b, inst| {
            b.iter(|| black_box(greedy(&inst.problem()).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("lazy", n), &inst, |b, inst| {
            b.iter(|| black_box(greedy_lazy(&inst.problem()).unwrap()))
        });
    }
    group.finish();
}

fn bench_enum2(c: &mut Criterion) {
    let inst = coverage_instance(16, 12);
    c.bench_function("enum_greedy/kappa2/n16", |b| {
        b.iter(|| black_box(enum_greedy(&inst.problem(), 2).unwrap()))
    });
}

criterion_group!(benches, bench_greedy_variants, bench_enum2);
criterion_main!(benches);
