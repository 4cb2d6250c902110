//! Benchmark bodies shared by the `benches/` entry points.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion, Throughput};
use lpm_shapley::disagreement::DEFAULT_ROOT_TOL;
use lpm_shapley::special::norm_cdf;
use lpm_shapley::{
    mc_shapley, run_study, shapley_exact, shapley_two_feature, zero_level_curve, GaussianLPM, Link,
    OutcomeSpec, RngSpec, StudyConfig,
};

fn model(m: usize) -> GaussianLPM {
    let coefficients = (0..m)
        .map(|i| if i % 2 == 0 { 0.7 } else { -1.1 })
        .collect();
    let means = (0..m).map(|i| 0.1 * i as f64).collect();
    let stddevs = (0..m).map(|i| 0.5 + 0.25 * (i % 4) as f64).collect();
    GaussianLPM::new(0.3, coefficients, means, stddevs).unwrap()
}

pub fn engine(c: &mut Criterion) {
    c.bench_function("norm_cdf", |b| b.iter(|| norm_cdf(black_box(0.37))));

    let normalized = GaussianLPM::normalized(1.0, vec![2.0, 1.0]).unwrap();
    let mut group = c.benchmark_group("two_feature");
    for o in OutcomeSpec::all(Link::Logit, 0.0).unwrap() {
        group.bench_function(o.kind().as_str(), |b| {
            b.iter(|| shapley_two_feature(&normalized, &o, black_box([0.4, -1.3])).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("exact_enumeration");
    let o = OutcomeSpec::probability(Link::Probit);
    for m in [2usize, 6, 10, 14] {
        let model = model(m);
        let x: Vec<f64> = (0..m).map(|i| 0.2 * i as f64 - 0.5).collect();
        group.throughput(Throughput::Elements(1 << m));
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| shapley_exact(&model, &o, black_box(&x)).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("permutation_oracle");
    group.sample_size(10);
    let model = model(4);
    let x = [0.3, -0.2, 1.0, 0.5];
    group.bench_function("m4_200x2000", |b| {
        b.iter(|| mc_shapley(&model, &o, &x, 200, 2000, RngSpec::new(1, 0)).unwrap())
    });
    group.finish();
}

pub fn study(c: &mut Criterion) {
    let mut group = c.benchmark_group("study");
    group.sample_size(10);
    let n = 100_000;
    group.throughput(Throughput::Elements(n));
    let config = StudyConfig::new(1.0, [2.0, 1.0], RngSpec::new(42, 0)).with_samples(n);
    group.bench_function("run_study_1e5", |b| {
        b.iter(|| run_study(black_box(&config)).unwrap())
    });
    group.finish();

    let model = GaussianLPM::normalized(1.0, vec![2.0, 1.0]).unwrap();
    let grid: Vec<f64> = (0..=100).map(|k| -5.0 + 0.1 * k as f64).collect();
    let mut group = c.benchmark_group("zero_level_curve");
    for o in OutcomeSpec::all(Link::Logit, 0.0).unwrap() {
        group.bench_function(o.kind().as_str(), |b| {
            b.iter(|| {
                zero_level_curve(&model, &o, 0, &grid, (-1.0, 1.0), DEFAULT_ROOT_TOL).unwrap()
            })
        });
    }
    group.finish();
}
