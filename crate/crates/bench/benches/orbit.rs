use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use so_orbit::boundary::{max_trace, support_boundary};
use so_orbit::star::certify_scaled_point;
use so_orbit_bench::instance;
use std::hint::black_box;

fn bench_max_trace(c: &mut Criterion) {
    let mut g = c.benchmark_group("max_trace");
    for n in [3usize, 8, 32] {
        let x = instance(n, 1, 1);
        let p = &x.map.coefficients()[0];
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| max_trace(black_box(p), black_box(&x.a))));
    }
    g.finish();
}

fn bench_certify(c: &mut Criterion) {
    let mut g = c.benchmark_group("certify_scaled_point");
    for (n, ell) in [(3usize, 2usize), (6, 2), (4, 3), (8, 4)] {
        let x = instance(n, ell, 2);
        g.bench_function(format!("n{n}_l{ell}"), |b| {
            b.iter(|| certify_scaled_point(&x.map, &x.a, &x.u, &x.v, black_box(0.5)))
        });
    }
    g.finish();
}

fn bench_support(c: &mut Criterion) {
    let mut g = c.benchmark_group("support_boundary");
    let x = instance(4, 2, 3);
    let ps = x.map.coefficients();
    for grid in [90usize, 720] {
        g.bench_with_input(BenchmarkId::from_parameter(grid), &grid, |b, &grid| {
            b.iter(|| support_boundary(&ps[0], &ps[1], &x.a, grid))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_max_trace, bench_certify, bench_support);
criterion_main!(benches);
