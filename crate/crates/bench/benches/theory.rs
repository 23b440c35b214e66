use criterion::{criterion_group, criterion_main, Criterion};
use scaling_lab::theory::{limit_factor_extrapolated, ns_prior_limit_factor, optimal_l, SpectrumFamily};
use scaling_lab::{Algorithm, ScalingLaw, Spectrum};
use std::hint::black_box;

fn limit_factors(c: &mut Criterion) {
    let mut group = c.benchmark_group("limit-factor");
    group.sample_size(20);
    group.bench_function("ns-prior-quadrature-p2", |b| b.iter(|| ns_prior_limit_factor(black_box(2.0), 2)));
    group.bench_function("power-law-extrapolated-p6", |b| {
        b.iter(|| limit_factor_extrapolated(&SpectrumFamily::PowerLaw { kappa: black_box(0.7) }, 6).unwrap())
    });
    let spectrum = Spectrum::bridge_fd(2.0, 1.0, 1, 1 << 14).unwrap();
    group.bench_function("bridge-fd-partial-2^14", |b| b.iter(|| black_box(&spectrum).partial_limit_factor(6)));
    group.finish();
}

fn optimal_step(c: &mut Criterion) {
    let rwm = ScalingLaw::new(Algorithm::Rwm, 1.0, 3.29, 1.0).unwrap();
    let sla = ScalingLaw::new(Algorithm::Sla, 1.0 / 16.0, 16.8, 1.0).unwrap();
    c.bench_function("optimal-l-rwm", |b| b.iter(|| optimal_l(black_box(&rwm)).unwrap()));
    c.bench_function("optimal-l-sla", |b| b.iter(|| optimal_l(black_box(&sla)).unwrap()));
}

criterion_group!(benches, limit_factors, optimal_step);
criterion_main!(benches);
