use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use setpart::sampler::{sample_boltzmann, sample_exact_recursive, HybridConfig, HybridSampler};
use setpart::BitSource;
use setpart_bench::{balanced, hybrid_counters};

fn hybrid(c: &mut Criterion) {
    let mut g = c.benchmark_group("hybrid");
    g.sample_size(10);
    for n in [1_000u64, 10_000] {
        let mut seed = 0;
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| {
                seed += 1;
                black_box(hybrid_counters(balanced(n), seed))
            })
        });
    }
    g.finish();
}

fn small_sizes(c: &mut Criterion) {
    let mut g = c.benchmark_group("small");
    let size = setpart::ProblemSize::new(10, 4).unwrap();
    let mut src = BitSource::new(1);
    g.bench_function("exact/10,4", |b| {
        b.iter(|| black_box(sample_exact_recursive(size, &mut src).unwrap()))
    });
    let mut sampler = HybridSampler::new(HybridConfig {
        easy_regimes: false,
        ..HybridConfig::default()
    });
    g.bench_function("hybrid-no-easy/10,4", |b| {
        b.iter(|| black_box(sampler.sample(size, &mut src).unwrap()))
    });
    g.finish();
}

fn boltzmann(c: &mut Criterion) {
    let mut g = c.benchmark_group("boltzmann");
    g.sample_size(10);
    for n in [1_000u64, 10_000] {
        let mut src = BitSource::new(2);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| black_box(sample_boltzmann(balanced(n), &mut src).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, hybrid, small_sizes, boltzmann);
criterion_main!(benches);
