use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use superres_bench::{grid_spikes, instance, phases};
use superres_core::certificate::{build_certificate, verify_certificate};
use superres_core::discrete::{basis_pursuit, L1Options};
use superres_core::model::sample_discrete;
use superres_core::sdp::{tv_superresolve, SdpOptions};
use superres_core::slepian::timeband_spectrum;
use superres_core::{Geometry, KernelSpec};

fn kernel(c: &mut Criterion) {
    let spec = KernelSpec::new(128).unwrap();
    c.bench_function("kernel eval_all x1000", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 0..1000 {
                acc += spec.eval_all(black_box(i as f64 * 1e-3))[2];
            }
            acc
        })
    });
}

fn certificate(c: &mut Criterion) {
    let spec = KernelSpec::new(128).unwrap();
    let (x, _) = instance(128, 20, 1);
    let t = x.locations_1d().to_vec();
    let v = phases(&x);
    c.bench_function("certificate build fc128 k20", |b| {
        b.iter(|| build_certificate(black_box(&t), &v, &spec).unwrap())
    });
    let cert = build_certificate(&t, &v, &spec).unwrap();
    c.bench_function("certificate verify fc128 grid64", |b| {
        b.iter(|| verify_certificate(black_box(&cert), 64, true).unwrap())
    });
}

fn sdp(c: &mut Criterion) {
    let (_, y) = instance(20, 4, 2);
    let opts = SdpOptions::default();
    let mut group = c.benchmark_group("sdp");
    group.sample_size(10);
    group.bench_function("tv_superresolve fc20 k4", |b| {
        b.iter(|| tv_superresolve(black_box(&y), &opts, None).unwrap())
    });
    group.finish();
}

fn discrete(c: &mut Criterion) {
    let (n_grid, fc) = (256, 16);
    let x = grid_spikes(n_grid, 4);
    let y = sample_discrete(&x, fc).unwrap();
    let g = Geometry::new(n_grid, fc).unwrap();
    let opts = L1Options::default();
    let mut group = c.benchmark_group("discrete");
    group.sample_size(10);
    group.bench_function("basis_pursuit N256 fc16 k4", |b| {
        b.iter(|| basis_pursuit(black_box(&y), &g, &opts).unwrap())
    });
    group.finish();
}

fn slepian(c: &mut Criterion) {
    let mut group = c.benchmark_group("slepian");
    group.sample_size(10);
    group.bench_function("timeband N4096 n1024 k48", |b| {
        b.iter(|| timeband_spectrum(4096, black_box(1024), 48).unwrap())
    });
    group.finish();
}

criterion_group!(benches, kernel, certificate, sdp, discrete, slepian);
criterion_main!(benches);
