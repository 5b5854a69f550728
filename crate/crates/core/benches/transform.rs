use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ppg_rocket::classify::{fit_balanced_forest_with, ForestConfig};
use ppg_rocket::rocket::{enumerate_kernels, fit_biases_with, transform_signals, DilationSchedule};
use ppg_rocket::signal::{synth_ppg, SynthParams};
use ppg_rocket::Parallelism;

const MODES: [Parallelism; 2] = [Parallelism::Sequential, Parallelism::Rayon];

fn corpus(n_subjects: usize) -> Vec<Vec<f64>> {
    let params = SynthParams::default().with_subjects(n_subjects, 0.2);
    let ds = synth_ppg(&params).expect("synth");
    ds.records().iter().map(|r| r.samples().to_vec()).collect()
}

fn bench_pipeline(c: &mut Criterion) {
    let signals = corpus(16);
    let refs: Vec<&[f64]> = signals.iter().map(|s| s.as_slice()).collect();
    let kernels = enumerate_kernels();
    let schedule = DilationSchedule::build(refs[0].len(), 9_996, kernels.len(), 32).unwrap();
    let model = fit_biases_with(&refs, &kernels, &schedule, 0, Parallelism::Rayon).unwrap();

    let mut g = c.benchmark_group("fit_biases");
    g.sample_size(10);
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &m| {
            b.iter(|| fit_biases_with(black_box(&refs), &kernels, &schedule, 0, m).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("transform_signals");
    g.sample_size(10);
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &m| {
            b.iter(|| transform_signals(black_box(&refs), &model, m).unwrap())
        });
    }
    g.finish();

    let x = transform_signals(&refs, &model, Parallelism::Rayon).unwrap();
    let labels: Vec<u8> = (0..x.rows()).map(|i| u8::from(i % 5 == 0)).collect();
    let cfg = ForestConfig { n_trees: 64, ..Default::default() };
    let mut g = c.benchmark_group("forest_fit");
    g.sample_size(10);
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &m| {
            b.iter(|| fit_balanced_forest_with(black_box(&x), &labels, &cfg, 0, m).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_pipeline);
criterion_main!(benches);
