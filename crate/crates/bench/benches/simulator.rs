use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qwnet_core::qudit::{canonical_bell, fourier_op, tensor};
use qwnet_core::readout::{correct_counts, synthesize_counts, transfer_matrix, MatrixMode};
use qwnet_core::{run_protocol, ProtocolSpec};

fn protocols(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_protocol");
    group.bench_function("bell2d", |b| b.iter(|| run_protocol(black_box(&ProtocolSpec::bell_swap_2d()))));
    for d in [2, 3, 5] {
        let spec = ProtocolSpec::ghz_swap_d(d);
        group.bench_with_input(BenchmarkId::new("ghz-d", d), &spec, |b, s| b.iter(|| run_protocol(s)));
    }
    let spec = ProtocolSpec::method2(3, 3, 2);
    group.bench_function("method2_3_3_2", |b| b.iter(|| run_protocol(black_box(&spec))));
    group.finish();
}

fn gates(c: &mut Criterion) {
    let mut group = c.benchmark_group("fourier_apply");
    for d in [2, 3, 5] {
        let bell = canonical_bell(d, 0, 0).unwrap();
        let state = tensor(&tensor(&bell, &bell).unwrap(), &bell).unwrap();
        let f = fourier_op(d).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &state, |b, s| b.iter(|| s.apply(&f, &[2])));
    }
    group.finish();
}

fn readout(c: &mut Criterion) {
    let m = transfer_matrix(0.95, 0.92, MatrixMode::Symmetric).unwrap();
    let mut group = c.benchmark_group("readout");
    for n in [2usize, 6, 10] {
        let probs = vec![1.0 / (1 << n) as f64; 1 << n];
        let matrices = vec![m; n];
        let counts = synthesize_counts(&probs, &matrices, 100_000, 1).unwrap();
        group.bench_with_input(BenchmarkId::new("correct", n), &counts, |b, k| b.iter(|| correct_counts(k, &matrices)));
    }
    group.finish();
}

criterion_group!(benches, protocols, gates, readout);
criterion_main!(benches);
