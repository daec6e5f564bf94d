use apsim_bench::mc_config;
use apsim_core::protocols::{run_at, ExperimentConfig, Protocol};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn exact(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact");
    for p in [Protocol::Pair, Protocol::Ghz3, Protocol::Swap] {
        let cfg = ExperimentConfig::new(p);
        g.bench_with_input(BenchmarkId::from_parameter(p), &cfg, |b, cfg| {
            b.iter(|| run_at(cfg, 30.0).unwrap())
        });
    }
    g.finish();
}

fn sampled(c: &mut Criterion) {
    let mut g = c.benchmark_group("mc_1e4");
    g.sample_size(10);
    for p in [Protocol::Pair, Protocol::Ghz3, Protocol::Swap] {
        let cfg = mc_config(p, 10_000);
        g.bench_with_input(BenchmarkId::from_parameter(p), &cfg, |b, cfg| {
            b.iter(|| run_at(cfg, 30.0).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, exact, sampled);
criterion_main!(benches);
