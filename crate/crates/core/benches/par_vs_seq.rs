use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use discmean::chareq::{CharacteristicFn, EquationParams};
use discmean::fields::Field;
use discmean::meanvalue::{lemma2_random_cases, lemma2_sweep, residual_sweep, QuadratureRule};
use discmean::par::Exec;
use discmean::synthesis::disk_samples;
use discmean::zeroscan::{find_zeros_with, ScanConfig};
use num_complex::Complex64;
use std::hint::black_box;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn residuals(c: &mut Criterion) {
    let params = EquationParams::new(2, 1, 1.0).unwrap();
    let rule = QuadratureRule::default();
    let f = Field::cylinder(Complex64::new(4.2, 0.3), 0, 1);
    let pts = disk_samples(2.0, 55, 3);
    let mut group = c.benchmark_group("residual_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| residual_sweep(black_box(&f), &pts, &params, &rule, exec).unwrap())
        });
    }
    group.finish();
}

fn plane_wave_oracle(c: &mut Criterion) {
    let params = EquationParams::new(3, 1, 1.3).unwrap();
    let rule = QuadratureRule::default();
    let cases = lemma2_random_cases(32, 1);
    let mut group = c.benchmark_group("lemma2_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| lemma2_sweep(black_box(&cases), &params, &rule, exec).unwrap())
        });
    }
    group.finish();
}

fn zero_scan(c: &mut Criterion) {
    let g = CharacteristicFn::new(3, 1).unwrap();
    let cfg = ScanConfig::new(40.0);
    let mut group = c.benchmark_group("find_zeros");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| find_zeros_with(black_box(&g), &cfg, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, residuals, plane_wave_oracle, zero_scan);
criterion_main!(benches);
