use criterion::{black_box, criterion_group, criterion_main, Criterion};

use spectraseq_bench::{sample_sequence, sample_tensor};
use spectraseq_core::{
    abs_pairing, classify_decay, extract_tensor, factorization_check, pairing, sobolev_norm,
    summability_test, torus_laplacian_spectrum, BlockTensor, EigenBasis, TorusDimension,
};

fn bench_spectrum(c: &mut Criterion) {
    let sp = torus_laplacian_spectrum(TorusDimension::One, 512);
    c.bench_function("summability_test torus1 J=512", |b| {
        b.iter(|| summability_test(black_box(&sp), black_box(0.6), 0.05).unwrap())
    });
}

fn bench_coeffs(c: &mut Criterion) {
    let sp = torus_laplacian_spectrum(TorusDimension::One, 511);
    let u = sample_sequence(&sp, 512);
    let w = sample_sequence(&sp, 512);
    c.bench_function("sobolev_norm 512 blocks", |b| {
        b.iter(|| sobolev_norm(black_box(&u), &sp, black_box(0.75)).unwrap())
    });
    c.bench_function("pairing 512 blocks", |b| {
        b.iter(|| pairing(black_box(&u), black_box(&w)).unwrap())
    });
    c.bench_function("abs_pairing 512 blocks", |b| {
        b.iter(|| abs_pairing(black_box(&u), black_box(&w)).unwrap())
    });
    c.bench_function("classify_decay 512 blocks", |b| {
        b.iter(|| classify_decay(black_box(&u), &sp, 2.0).unwrap())
    });
}

fn bench_operators(c: &mut Criterion) {
    let sp = torus_laplacian_spectrum(TorusDimension::One, 63);
    let t = sample_tensor(&sp, 64, 0.2);
    let u = sample_sequence(&sp, 64);
    c.bench_function("tensor apply 64 blocks fill 0.2", |b| {
        b.iter(|| t.apply(black_box(&u)).unwrap())
    });
    c.bench_function("tensor adjoint 64 blocks", |b| {
        b.iter(|| black_box(&t).adjoint())
    });

    let small = sample_tensor(&sp, 16, 0.4);
    c.bench_function("extract_tensor 16 blocks", |b| {
        b.iter(|| extract_tensor(|v| small.apply(v), &sp, 16, &sp, 16).unwrap())
    });
}

fn bench_universality(c: &mut Criterion) {
    let basis = EigenBasis::torus1(16);
    let diag = BlockTensor::diagonal(basis.spectrum(), 17, |l| {
        num_complex::Complex64::new(l.powf(-2.0), 0.0)
    })
    .unwrap();
    c.bench_function("factorization_check J=16 grid=64", |b| {
        b.iter(|| factorization_check(black_box(&diag), &basis, 64).unwrap())
    });
}

criterion_group!(
    benches,
    bench_spectrum,
    bench_coeffs,
    bench_operators,
    bench_universality
);
criterion_main!(benches);
