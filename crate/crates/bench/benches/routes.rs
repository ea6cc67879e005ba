use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fraclab_core::mode::extension_multiplier;
use fraclab_core::model::q2gamma_numeric;
use fraclab_core::recursion::verify_recursion;
use fraclab_core::scattering::scattering_multiplier;
use fraclab_core::spectral::{fractional_multiplier_apply, random_field};
use fraclab_core::{FracParams, SolveMethod};

fn fourier(c: &mut Criterion) {
    let f = random_field(2, 64, 8, 1).unwrap();
    c.bench_function("fourier apply 64x64", |b| b.iter(|| fractional_multiplier_apply(black_box(&f), 0.75).unwrap()));
}

fn extension(c: &mut Criterion) {
    let mut g = c.benchmark_group("extension multiplier");
    g.sample_size(20);
    for gamma in [0.75, 1.5] {
        let p = FracParams::unchecked_range(4, gamma).unwrap();
        for (method, tag) in [(SolveMethod::SemiAnalytic, "sa"), (SolveMethod::FiniteDifference, "fd")] {
            g.bench_with_input(BenchmarkId::new(tag, gamma), &p, |b, p| {
                b.iter(|| extension_multiplier(black_box(2.0), p, method).unwrap())
            });
        }
    }
    g.finish();
}

fn scattering(c: &mut Criterion) {
    let mut g = c.benchmark_group("scattering multiplier");
    g.sample_size(20);
    let p = FracParams::new(4, 1.25).unwrap();
    for (method, tag) in [(SolveMethod::SemiAnalytic, "sa"), (SolveMethod::FiniteDifference, "fd")] {
        g.bench_function(tag, |b| b.iter(|| scattering_multiplier(black_box(2.0), &p, method).unwrap()));
    }
    g.finish();
}

fn exact_and_model(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact and model");
    g.sample_size(10);
    g.bench_function("recursion kmax=8 trials=20", |b| b.iter(|| verify_recursion(8, 20, black_box(0)).unwrap()));
    let p = FracParams::new(4, 1.5).unwrap();
    g.bench_function("model q shooting", |b| b.iter(|| q2gamma_numeric(black_box(&p)).unwrap()));
    g.finish();
}

criterion_group!(benches, fourier, extension, scattering, exact_and_model);
criterion_main!(benches);
