use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use msk_bench::coverage_instance;
use msk_core::{measure_union, ElementSet, IntervalSet, ValueOracle};

fn bench_measure_union(c: &mut Criterion) {
    let mut group = c.benchmark_group("measure_union");
    for k in [16usize, 256] {
        let sets: Vec<IntervalSet> = (0..k)
            .map(|i| {
                let a = (i as f64 * 0.37).fract();
                IntervalSet::new(vec![(a, a + 0.05)]).unwrap()
            })
            .collect();
        group.bench_with_input(BenchmarkId::from_parameter(k), &sets, |b, sets| {
            b.iter(|| black_box(measure_union(sets)))
        });
    }
    group.finish();
}

fn bench_extension_queries(c: &mut Criterion) {
    // the f(A ∪ {e}) pattern that dominates greedy runs
    let inst = coverage_instance(512, 3);
    let oracle = inst.oracle();
    let base: ElementSet = inst
        .problem()
        .element_ids()
        .filter(|e| e.0 % 2 == 0)
        .collect();
    oracle.evaluate(&base).unwrap();
    let probes: Vec<_> = inst.problem().element_ids().filter(|e| e.0 % 2 == 1).collect();
    c.bench_function("coverage_extension/n512", |b| {
        let mut i = 0;
        b.iter(|| {
            let e = probes[i % probes.len()];
            i += 1;
            black_box(oracle.evaluate_ext(&base, &[e]).unwrap())
        })
    });
}

criterion_group!(benches, bench_measure_union, bench_extension_queries);
criterion_main!(benches);
