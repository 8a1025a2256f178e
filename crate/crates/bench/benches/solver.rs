use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use germforge_core::sample::{random_element, random_map};
use germforge_core::{solve_equivalence, Field, GroupTag, LocalRingPresentation, SolveRequest};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    for d in [4, 6, 8] {
        let x = LocalRingPresentation::parse(&["x", "z"], &[], Field::Rational, d, &[]).unwrap();
        let y = LocalRingPresentation::parse(&["y"], &[], Field::Rational, d, &[]).unwrap();
        let mut rng = StdRng::seed_from_u64(d as u64);
        let f = random_map(&mut rng, &x, &y, 1, 0.5).unwrap();
        for tag in [GroupTag::R, GroupTag::LR, GroupTag::K] {
            let (g, seed) = random_element(&mut rng, tag, &x, &y, 2).unwrap();
            let ft = g.apply(&f).unwrap();
            let req = SolveRequest::new(tag, &f, &ft, d + 1).seed(seed);
            group.bench_with_input(BenchmarkId::new(format!("{tag}"), d), &d, |bch, _| {
                bch.iter(|| black_box(solve_equivalence(&req).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = solve
}
criterion_main!(benches);
