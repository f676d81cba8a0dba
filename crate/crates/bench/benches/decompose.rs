use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use serial_emd::{serial_decompose, slicewise_decompose, Algorithm, SiftConfig, TransitionSpec};
use serial_emd_bench::{ati_signals, bench_ensemble, pickup_signals};

fn serial_vs_slicewise(c: &mut Criterion) {
    let sift = SiftConfig::default();
    let ens = bench_ensemble();
    for (name, x, d) in [("pickup", pickup_signals(), 50), ("ati", ati_signals(), 20)] {
        let spec = TransitionSpec::new(d).unwrap();
        let mut group = c.benchmark_group(format!("decompose/{name}"));
        group.sample_size(10);
        for algo in Algorithm::ALL {
            group.bench_with_input(BenchmarkId::new("serial", algo), &algo, |b, &algo| {
                b.iter(|| serial_decompose(&x, spec, algo, &sift, &ens).unwrap())
            });
            group.bench_with_input(BenchmarkId::new("slicewise", algo), &algo, |b, &algo| {
                b.iter(|| slicewise_decompose(&x, algo, &sift, &ens).unwrap())
            });
        }
        group.finish();
    }
}

fn transition_length(c: &mut Criterion) {
    let sift = SiftConfig::default();
    let ens = bench_ensemble();
    let x = pickup_signals();
    let mut group = c.benchmark_group("decompose/d-sweep");
    for d in [1, 5, 10, 20, 50, 100, 200, 500] {
        let spec = TransitionSpec::new(d).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &spec, |b, &spec| {
            b.iter(|| serial_decompose(&x, spec, Algorithm::Emd, &sift, &ens).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, serial_vs_slicewise, transition_length);
criterion_main!(benches);
