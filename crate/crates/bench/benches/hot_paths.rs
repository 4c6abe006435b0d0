use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use transferlab::experiments::allocations::simulate_occupancy;
use transferlab::experiments::semistable::{st_petersburg_sum, LogIndexLaw};
use transferlab::stats::{ks_distance, ks_two_sample_distance};
use transferlab::{mixture_cdf, Normal, SeedSpec};
use transferlab_bench::{discrete_scale_mixture, normal_sample, uniform_scale_mixture};

fn ks(c: &mut Criterion) {
    let sample = normal_sample(10_000, 1);
    let other = normal_sample(10_000, 2);
    let z = Normal::standard();
    let mixture = uniform_scale_mixture();
    c.bench_function("ks_one_sample_normal_1e4", |b| b.iter(|| ks_distance(black_box(&sample), &z)));
    c.bench_function("ks_one_sample_quadrature_mixture_1e4", |b| {
        b.iter(|| ks_distance(black_box(&sample), &mixture))
    });
    c.bench_function("ks_two_sample_1e4", |b| b.iter(|| ks_two_sample_distance(black_box(&sample), &other)));
}

fn mixture(c: &mut Criterion) {
    let continuous = uniform_scale_mixture();
    let discrete = discrete_scale_mixture();
    c.bench_function("mixture_cdf_quadrature", |b| b.iter(|| mixture_cdf(&continuous, black_box(0.7))));
    c.bench_function("mixture_cdf_discrete", |b| b.iter(|| mixture_cdf(&discrete, black_box(0.7))));
}

fn replicates(c: &mut Criterion) {
    let mut rng = SeedSpec::new(3, 0).rng();
    c.bench_function("allocation_replicate_r0_N1e4", |b| {
        b.iter(|| simulate_occupancy(0, black_box(10_000), 10_000, &mut rng))
    });
    c.bench_function("st_petersburg_sum_2e40", |b| b.iter(|| st_petersburg_sum(black_box(1 << 40), &mut rng)));
    let law = LogIndexLaw::new(1 << 62).expect("valid horizon");
    c.bench_function("log_index_law_draw_2e62", |b| b.iter(|| law.sample(&mut rng)));
}

criterion_group!(benches, ks, mixture, replicates);
criterion_main!(benches);
