use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;
use vnfscale_bench::solver_sizes;
use vnfscale_core::{dense_oracle, solve, BaseParams, CostSpec, KScan, StateSpace, SystemParams};

fn recursion(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    for (name, p) in solver_sizes() {
        g.throughput(Throughput::Elements(StateSpace::new(p).total_states() as u64));
        g.bench_with_input(BenchmarkId::from_parameter(name), &p, |b, p| b.iter(|| solve(black_box(p)).unwrap()));
    }
    g.finish();
}

fn dense(c: &mut Criterion) {
    let p = SystemParams::new(30.0, 1.0, 0.05, 20, 10, 80).unwrap();
    c.bench_function("dense_oracle/n0=20,k=10,K=80", |b| b.iter(|| dense_oracle(black_box(&p)).unwrap()));
}

fn scan(c: &mut Criterion) {
    let base = BaseParams::new(130.0, 1.0, 0.005, 110, 250).unwrap();
    let spec = CostSpec::from_weights(1.0, 0.003626);
    let mut g = c.benchmark_group("optimize");
    g.sample_size(10);
    g.bench_function("argmin/defaults", |b| b.iter(|| KScan::new(base).argmin(&spec).unwrap()));
    g.bench_function("threshold_walk/defaults", |b| {
        b.iter(|| KScan::new(base).threshold_walk(&CostSpec::from_delta(1.0, 140.0, 1.2)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, recursion, dense, scan);
criterion_main!(benches);
