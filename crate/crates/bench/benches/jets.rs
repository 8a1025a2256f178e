use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use germforge_core::sample::random_jet;
use germforge_core::{Field, LocalRingPresentation};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn arithmetic(c: &mut Criterion) {
    let mut group = c.benchmark_group("jet");
    for d in [6, 10, 14] {
        let r = LocalRingPresentation::parse(&["x", "y"], &["t"], Field::Rational, d, &[]).unwrap();
        let mut rng = StdRng::seed_from_u64(d as u64);
        let a = random_jet(&mut rng, &r, 0, d, 0.6);
        let b = random_jet(&mut rng, &r, 0, d, 0.6);
        let images: Vec<_> = (0..3).map(|_| random_jet(&mut rng, &r, 1, d, 0.4)).collect();
        group.bench_with_input(BenchmarkId::new("mul", d), &d, |bch, _| bch.iter(|| black_box(&a * &b)));
        group.bench_with_input(BenchmarkId::new("substitute", d), &d, |bch, _| {
            bch.iter(|| black_box(a.substitute(&images).unwrap()))
        });
        let cusp = LocalRingPresentation::parse(&["x", "y"], &["t"], Field::Rational, d, &["y^2 - x^3"]).unwrap();
        let p = a.pow(2);
        group.bench_with_input(BenchmarkId::new("normal_form", d), &d, |bch, _| {
            bch.iter(|| black_box(cusp.normal_form(&p).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, arithmetic);
criterion_main!(benches);
