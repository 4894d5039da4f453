use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nagumo_bench::{initial_u, lattices, noise, params};
use nagumo_core::{
    exact_density, fp_residual_langevin, liouville_residual_extended, steady_state_1d, EtaMode,
    PhasePoint,
};

fn residuals(c: &mut Criterion) {
    let mut group = c.benchmark_group("residual");
    for (label, spec) in lattices() {
        let u = initial_u(spec.n());
        group.bench_function(BenchmarkId::new("fp_langevin", &label), |b| {
            b.iter(|| fp_residual_langevin(black_box(&u), 0.04, &spec, &params()).unwrap())
        });
        let pt = PhasePoint {
            u: u.clone(),
            lambda: 0.3,
            eta: vec![0.1; EtaMode::Independent.eta_len(spec.n())],
        };
        group.bench_function(BenchmarkId::new("liouville_extended", &label), |b| {
            b.iter(|| {
                liouville_residual_extended(black_box(&pt), &noise(), &spec, &params()).unwrap()
            })
        });
    }
    group.finish();
}

fn densities(c: &mut Criterion) {
    let mut group = c.benchmark_group("density");
    for m in [2001usize, 20001] {
        group.bench_function(BenchmarkId::new("steady_state_1d", m), |b| {
            b.iter(|| steady_state_1d(&params(), 0.04, -0.5, 1.5, m).unwrap())
        });
        group.bench_function(BenchmarkId::new("exact_density", m), |b| {
            b.iter(|| exact_density(&params(), 0.04, -0.5, 1.5, m).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, residuals, densities);
criterion_main!(benches);
