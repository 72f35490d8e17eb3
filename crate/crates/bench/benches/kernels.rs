use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use floquet_core::experiments::simulate;
use floquet_core::noise::sample_noise;
use floquet_core::numerics::{bessel_j, pauli_exp};
use floquet_core::units::mhz;
use floquet_core::{magnus_h0, DriveAnsatz, ExperimentConfig, ManyBodyProblem, NoiseSpec, PauliVector, SweepSchedule};

fn config(extra: &[(&str, &str)]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    let pairs: Vec<(String, String)> = extra.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    cfg.set_all(&pairs).unwrap();
    cfg
}

fn kernels(c: &mut Criterion) {
    c.bench_function("bessel_j1", |b| b.iter(|| bessel_j(1, black_box(1.7)).unwrap()));
    let a = PauliVector::new(0.3, -0.2, 1.1);
    c.bench_function("pauli_exp", |b| b.iter(|| pauli_exp(black_box(a), 1e-3)));

    let spec = NoiseSpec::from_rms(mhz(2.5), mhz(0.05), 1000, 1).unwrap();
    let r = sample_noise(&spec, 0);
    c.bench_function("noise_sample_10k", |b| b.iter(|| r.sample_uniform(0.0, black_box(6e-4), 10_000)));

    let schedule = SweepSchedule::cubic(3.0, 3.0).unwrap();
    let problem = ManyBodyProblem::qubit(1.0, schedule).unwrap();
    let ansatz = DriveAnsatz::new(1.2, vec![0.1, 0.4, -0.2, 0.05]).unwrap();
    c.bench_function("magnus_h0_qubit", |b| b.iter(|| magnus_h0(&problem, &ansatz, black_box(1.5)).unwrap()));
}

fn evolutions(c: &mut Criterion) {
    let mut g = c.benchmark_group("evolve");
    g.sample_size(10);
    let fe = config(&[("protocol.name", "fe")]);
    g.bench_function("fe_noiseless", |b| b.iter(|| simulate(black_box(&fe)).unwrap()));
    let noisy = config(&[
        ("protocol.name", "fe"),
        ("noise.bandwidth_mhz", "2.5"),
        ("noise.rms_mhz", "0.05"),
        ("ensemble.realizations", "4"),
    ]);
    g.bench_function("fe_noisy_4", |b| b.iter(|| simulate(black_box(&noisy)).unwrap()));
    g.finish();
}

criterion_group!(benches, kernels, evolutions);
criterion_main!(benches);
