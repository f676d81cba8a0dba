use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use serial_emd::{concatenate, concatenate_naive, deconcatenate, TransitionSpec};
use serial_emd_bench::{ati_signals, pickup_signals};

fn concat(c: &mut Criterion) {
    let mut group = c.benchmark_group("concatenate");
    for (name, x, d) in [("pickup", pickup_signals(), 50), ("ati", ati_signals(), 20)] {
        let spec = TransitionSpec::new(d).unwrap();
        group.bench_with_input(BenchmarkId::new("matrix", name), &x, |b, x| {
            b.iter(|| concatenate(x, spec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("naive", name), &x, |b, x| {
            b.iter(|| concatenate_naive(x, spec).unwrap())
        });
    }
    group.finish();
}

fn deconcat(c: &mut Criterion) {
    let x = ati_signals();
    let s = concatenate(&x, TransitionSpec::new(20).unwrap()).unwrap();
    let modes = vec![s.samples.clone(); 8];
    c.bench_function("deconcatenate/ati-8-modes", |b| {
        b.iter(|| deconcatenate(&modes, x.rows(), x.channels(), 20).unwrap())
    });
}

criterion_group!(benches, concat, deconcat);
criterion_main!(benches);
