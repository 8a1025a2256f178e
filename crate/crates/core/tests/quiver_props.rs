use germforge_core::sample::{perturb_nested, random_tree_problem};
use germforge_core::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn purification_keeps_every_edge_condition() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..50 {
        let n = rng.gen_range(2..=6);
        let (p, pure) = random_tree_problem(&mut rng, n, Field::Rational, 5, 0.3).unwrap();
        assert!(check_rectangles(&p, &pure, 6).unwrap().is_empty());
        let mut sol = NonPureSolution::from_pure(&p, &pure, 6).unwrap();
        perturb_nested(&mut rng, &p, &mut sol, 0.3).unwrap();
        let out = purify(&sol, &p).unwrap();
        assert!(out.steps.iter().all(|s| s.holds));
        assert!(out.verified);
    }
}
