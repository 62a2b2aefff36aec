use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use slice_gauss::slice_geometry::integrate_geometry;
use slice_gauss::{
    build_geometry, covariance_from_family, gaussian_expectation, gram_schmidt, great_circle_integral_quadrature,
    ExpectationMethod, Integrand, IntegrandKind, OrthonormalFamily, SequenceVector, SliceSpec,
};

fn degenerate_spec(n: usize) -> SliceSpec {
    let family = OrthonormalFamily::new(vec![SequenceVector::explicit(vec![0.6, 0.8]).unwrap()]).unwrap();
    SliceSpec::new(family, vec![1.0], 2, n).unwrap()
}

fn slice_mc(c: &mut Criterion) {
    let f = Integrand::cos_coordinate(2, 0);
    let mut group = c.benchmark_group("slice_mc_10k");
    for n in [64usize, 1024, 4096] {
        let g = build_geometry(&degenerate_spec(n)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| integrate_geometry(g, &f, 10_000, black_box(1)).unwrap())
        });
    }
    group.finish();
}

fn geometry(c: &mut Criterion) {
    let family = OrthonormalFamily::new(vec![
        SequenceVector::geometric(vec![], 3f64.sqrt(), 0.5).unwrap(),
        SequenceVector::geometric(vec![-0.5], 3.0, 0.5).unwrap(),
    ])
    .unwrap();
    let spec = SliceSpec::new(family, vec![0.5, -0.5], 2, 4096).unwrap();
    c.bench_function("build_geometry_gamma2_n4096", |b| b.iter(|| build_geometry(black_box(&spec)).unwrap()));
}

fn gaussian(c: &mut Criterion) {
    let spec = covariance_from_family(
        &OrthonormalFamily::new(vec![SequenceVector::explicit(vec![0.6, 0.0, 0.8]).unwrap()]).unwrap(),
        3,
        &[0.5],
    )
    .unwrap();
    let f = Integrand::new(
        3,
        IntegrandKind::Product {
            factors: vec![
                IntegrandKind::CosLinear { a: vec![1.0, 0.5, 0.0], b: 0.0 },
                IntegrandKind::RampIndicator { m: 2.0, axis: 2, center: 0.0 },
            ],
        },
    )
    .unwrap();
    c.bench_function("gauss_hermite_rank2", |b| {
        b.iter(|| gaussian_expectation(&spec, black_box(&f), ExpectationMethod::Quadrature).unwrap())
    });
    let g = Integrand::cos_coordinate(3, 0);
    c.bench_function("closed_form_cos", |b| {
        b.iter(|| gaussian_expectation(&spec, black_box(&g), ExpectationMethod::ClosedForm).unwrap())
    });
}

fn orthonormalize(c: &mut Criterion) {
    let mut group = c.benchmark_group("gram_schmidt");
    for (gamma, len) in [(3usize, 64usize), (8, 1024)] {
        let vectors: Vec<Vec<f64>> = (0..gamma)
            .map(|i| (0..len).map(|j| (((i + 1) * (j + 3)) as f64).sin()).collect())
            .collect();
        group.bench_with_input(BenchmarkId::new(format!("{gamma}x{len}"), len), &vectors, |b, v| {
            b.iter(|| gram_schmidt(v).unwrap())
        });
    }
    group.finish();
}

fn quadrature(c: &mut Criterion) {
    let s = 0.5f64.sqrt();
    let family = OrthonormalFamily::new(vec![SequenceVector::explicit(vec![s, 0.0, s]).unwrap()]).unwrap();
    let f = Integrand::new(3, IntegrandKind::GaussBump { c: 0.3, m: vec![0.1, 0.2, 0.0] }).unwrap();
    c.bench_function("great_circle_quadrature_ball2_n512", |b| {
        b.iter(|| great_circle_integral_quadrature(black_box(512), &family, &f, 1e-10).unwrap())
    });
}

criterion_group!(benches, slice_mc, geometry, gaussian, orthonormalize, quadrature);
criterion_main!(benches);
