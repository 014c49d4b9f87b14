use criterion::{criterion_group, criterion_main, Criterion};
use speclen::representation::schottky_pair;
use speclen::{
    compute_spectrum, compute_spectrum_serial, sample_curve, sample_curve_serial, CurveOptions,
    LengthFunctional, SpectrumOptions, WindowPolicy,
};

fn columns() -> Vec<(speclen::Representation, LengthFunctional)> {
    let a1 = LengthFunctional::alpha(1, 2).unwrap();
    vec![
        (schottky_pair(2.6, 1.6, std::f64::consts::FRAC_PI_3).unwrap(), a1.clone()),
        (schottky_pair(1.8, 2.6, 1.1).unwrap(), a1),
    ]
}

fn bench_spectrum(c: &mut Criterion) {
    let cols = columns();
    let opts = SpectrumOptions::default();
    let mut g = c.benchmark_group("spectrum_n10");
    g.sample_size(10);
    g.bench_function("parallel", |b| {
        b.iter(|| compute_spectrum(&cols, 2, 10, &opts).unwrap().row_count())
    });
    g.bench_function("serial", |b| {
        b.iter(|| compute_spectrum_serial(&cols, 2, 10, &opts).unwrap().row_count())
    });
    g.finish();
}

fn bench_curve(c: &mut Criterion) {
    let cols = columns();
    let table = compute_spectrum(&cols, 2, 11, &SpectrumOptions::default()).unwrap();
    let copts = CurveOptions::default();
    let policy = WindowPolicy::default();
    let mut g = c.benchmark_group("curve_n11");
    g.sample_size(10);
    g.bench_function("parallel", |b| {
        b.iter(|| sample_curve(&table, 0, 1, &copts, &policy).unwrap().samples.len())
    });
    g.bench_function("serial", |b| {
        b.iter(|| sample_curve_serial(&table, 0, 1, &copts, &policy).unwrap().samples.len())
    });
    g.finish();
}

criterion_group!(benches, bench_spectrum, bench_curve);
criterion_main!(benches);
