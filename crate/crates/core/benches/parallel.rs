//! Sequential (one-thread pool) against the default rayon pool for the
//! data-parallel kernels.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ethweyl::basis::FockBasis;
use ethweyl::lmg::{self, LmgParams};
use ethweyl::oracle1d::{self, OracleConfig};
use ethweyl::semiclassics::{sample_shell, semiclassical_profile, LmgModel, PredictorConfig};
use ethweyl::spectral::{self, band_profile, ProfileConfig};
use rayon::{ThreadPool, ThreadPoolBuilder};

fn pools() -> Vec<(&'static str, ThreadPool)> {
    let seq = ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = ThreadPoolBuilder::new().build().unwrap();
    vec![("sequential", seq), ("parallel", all)]
}

fn spectral_kernels(c: &mut Criterion) {
    let basis = FockBasis::new(40).unwrap();
    let h = lmg::build_hamiltonian(&LmgParams::default().with_omega(40), &basis).unwrap();
    let s = spectral::diagonalize(&h).unwrap();
    let obs = basis.matrix_observable_a();
    let o = spectral::eigenbasis_elements(&obs, &s).unwrap();
    let e = 0.5 * (s.values[0] + s.values[s.values.len() - 1]);
    let mut g = c.benchmark_group("spectral");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("eigenbasis_elements", name), |b| {
            pool.install(|| b.iter(|| spectral::eigenbasis_elements(black_box(&obs), &s).unwrap()))
        });
        g.bench_function(BenchmarkId::new("band_profile", name), |b| {
            pool.install(|| b.iter(|| band_profile(black_box(&o), &s.values, e, &ProfileConfig::default()).unwrap()))
        });
    }
    g.finish();
}

fn semiclassical_kernels(c: &mut Criterion) {
    let model = LmgModel(LmgParams::default().with_omega(60));
    let o = lmg::observable_symbol();
    let omegas: Vec<f64> = (-10..=10).map(|k| 0.1 * k as f64).collect();
    let cfg = PredictorConfig { n_zb: 32, ..Default::default() };
    let mut g = c.benchmark_group("semiclassics");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("sample_shell", name), |b| {
            pool.install(|| b.iter(|| sample_shell(&model, 35.94, 0.4, 5000, black_box(1)).unwrap()))
        });
        g.bench_function(BenchmarkId::new("semiclassical_profile", name), |b| {
            pool.install(|| b.iter(|| semiclassical_profile(&model, &o, 35.94, 1.0 / 60.0, black_box(&omegas), &cfg).unwrap()))
        });
    }
    g.finish();
}

fn oracle_kernels(c: &mut Criterion) {
    let words = vec!["q p".parse().unwrap()];
    let mut g = c.benchmark_group("oracle1d");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("identity_suite", name), |b| {
            pool.install(|| b.iter(|| oracle1d::run_suite(black_box(&words), 3, &[1.0], &OracleConfig::default(), 1e-3).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, spectral_kernels, semiclassical_kernels, oracle_kernels);
criterion_main!(benches);
