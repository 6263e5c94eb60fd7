use bykov_core::birkhoff::averages_along;
use bykov_core::{
    generate_hitting_sequence, lemma_diagnostics, verify_conjugacy, Chart, Observable,
    PerturbationSpec, SectionPoint, SystemParams,
};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn p0() -> SystemParams {
    SystemParams::new(2.0, 1.0, 1.0, 3.0, 1.5, 2.0, 0.5)
}

fn seed() -> SectionPoint {
    SectionPoint::from_coordinate(Chart::Out2, 1.0, 0.1).unwrap()
}

fn hitting(c: &mut Criterion) {
    let mut group = c.benchmark_group("hitting_sequence");
    let perturbed = p0().with_perturbation(PerturbationSpec {
        c1: 0.1,
        c2: 0.1,
        eps: 0.5,
    });
    for pairs in [12usize, 30] {
        group.bench_with_input(BenchmarkId::new("idealized", pairs), &pairs, |b, &n| {
            b.iter(|| generate_hitting_sequence(black_box(&seed()), &p0(), n).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("perturbed", pairs), &pairs, |b, &n| {
            b.iter(|| generate_hitting_sequence(black_box(&seed()), &perturbed, n).unwrap())
        });
    }
    group.finish();
}

fn diagnostics(c: &mut Criterion) {
    let p = p0();
    let d = p.derived().unwrap();
    let h = generate_hitting_sequence(&seed(), &p, 12).unwrap();
    c.bench_function("lemma_diagnostics/12", |b| {
        b.iter(|| lemma_diagnostics(black_box(&h), &d).unwrap())
    });
}

fn smooth_average(c: &mut Criterion) {
    let p = p0();
    let h = generate_hitting_sequence(&seed(), &p, 12).unwrap();
    let g = Observable::smooth(0.0, 1.0, 2.0, 0.5);
    c.bench_function("smooth_birkhoff/24", |b| {
        b.iter(|| averages_along(black_box(&h), &p, &g, 24).unwrap())
    });
}

fn conjugacy(c: &mut Criterion) {
    let p = p0();
    let g = SystemParams::new(4.0, 2.0, 7.0 / 3.0, 6.0, 3.0, 1.0, 0.25);
    c.bench_function("verify_conjugacy/10", |b| {
        b.iter(|| verify_conjugacy(black_box(&seed()), &p, &g, 10, 1e-8).unwrap())
    });
}

criterion_group!(benches, hitting, diagnostics, smooth_average, conjugacy);
criterion_main!(benches);
