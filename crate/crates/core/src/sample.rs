//! Random valid jets, maps and group elements, including on singular
//! rings, for tests and benchmarks.
//!
//! Automorphisms are built as `L ∘ exp(v)` where `L` is a linear map
//! preserving the ideal and `v` is a degree-raising vector field with
//! `v(J) ⊆ J`; such fields are found by linear algebra.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::build::monomials;
use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::germs::{GermMap, LocalRingPresentation, Ring};
use crate::groups::{Automorphism, ContactElem, GroupElement, GroupTag, KElem, LRElem};
use crate::jet::Jet;
use crate::quiver::{NonPureSolution, QuiverMorphismProblem, QuiverSpec, VertexMorphism};
use crate::tangent::{apply_field, logarithmic_fields};
use crate::vars::Monomial;

/// A small nonzero scalar: an integer in `-2..=2` or, over ℚ, sometimes a half.
pub fn small_scalar(rng: &mut impl Rng, field: Field) -> Scalar {
    loop {
        let n = rng.gen_range(-2i64..=2);
        if n == 0 {
            continue;
        }
        let s = field.from_i64(n);
        if s.is_zero() {
            continue;
        }
        if field == Field::Rational && rng.gen_bool(0.2) {
            return &s * &field.from_i64(2).inv().expect("2 is a unit");
        }
        return s;
    }
}

/// A uniformly random element of a finite field, or a small scalar
/// (possibly zero) over ℚ.
pub fn any_scalar(rng: &mut impl Rng, field: Field) -> Scalar {
    match field {
        Field::Prime(p) => field.from_i64(rng.gen_range(0..p as i64)),
        Field::Rational => {
            if rng.gen_bool(0.3) {
                field.zero()
            } else {
                small_scalar(rng, field)
            }
        }
    }
}

/// A random jet with terms of degree `lo..=hi`, each present with
/// probability `density`.
pub fn random_jet(rng: &mut impl Rng, ring: &LocalRingPresentation, lo: u32, hi: u32, density: f64) -> Jet {
    let field = ring.field();
    let hi = hi.min(ring.trunc());
    let mut terms: Vec<(Monomial, Scalar)> = Vec::new();
    for m in monomials(ring.nvars(), lo, hi, |_| true) {
        if rng.gen_bool(density) {
            terms.push((m, small_scalar(rng, field)));
        }
    }
    Jet::from_terms(ring.vars(), field, ring.trunc(), terms)
}

/// A random map with components of order at least `lo` into a smooth target.
pub fn random_map(rng: &mut impl Rng, source: &Ring, target: &Ring, lo: u32, density: f64) -> Result<GermMap> {
    if !target.is_smooth() {
        return Err(Error::Unsupported("random maps into singular targets".into()));
    }
    let comps = target.free_indices().iter().map(|_| random_jet(rng, source, lo.max(1), source.trunc(), density)).collect();
    GermMap::new(source, target, comps)
}

/// A random rooted tree of smooth germs with `n` vertices `v0` (the root),
/// `v1`, … and a pure solution: the domain maps `f̃` are random and the
/// codomain maps are `f_wv = Φ_w∘f̃_wv∘Φ_v⁻¹` for random automorphisms `Φ_v`.
pub fn random_tree_problem(
    rng: &mut impl Rng,
    n: usize,
    field: Field,
    trunc: u32,
    density: f64,
) -> Result<(QuiverMorphismProblem, Vec<VertexMorphism>)> {
    let names = [["x"].as_slice(), ["x", "y"].as_slice()];
    let mut rings = Vec::new();
    let mut phis = Vec::new();
    for _ in 0..n {
        let vars = if rng.gen_bool(0.25) { names[1] } else { names[0] };
        let r = LocalRingPresentation::parse(vars, &[], field, trunc, &[])?;
        phis.push(random_automorphism(rng, &r, 2).0);
        rings.push(r);
    }
    let id = |i: usize| format!("v{i}");
    let mut domain = QuiverSpec::new();
    let mut codomain = QuiverSpec::new();
    for (i, r) in rings.iter().enumerate() {
        domain = domain.vertex(&id(i), r);
        codomain = codomain.vertex(&id(i), r);
    }
    for i in 1..n {
        let w = rng.gen_range(0..i);
        let ft = random_map(rng, &rings[i], &rings[w], 1, density)?;
        let phi_w = GermMap::new(&rings[w], &rings[w], phis[w].free_images())?;
        let inv_v = phis[i].inverse()?;
        let inv_v = GermMap::new(&rings[i], &rings[i], inv_v.free_images())?;
        let f = phi_w.compose(&ft.compose(&inv_v)?)?;
        domain = domain.edge(&id(i), &id(w), ft);
        codomain = codomain.edge(&id(i), &id(w), f);
    }
    let morphisms = (0..n)
        .map(|i| VertexMorphism {
            vertex: id(i),
            domain: rings[i].clone(),
            codomain: rings[i].clone(),
            images: phis[i].images().to_vec(),
        })
        .collect();
    Ok((QuiverMorphismProblem::new(domain, codomain)?, morphisms))
}

/// Adds to every non-root `Ψ_v` random multiples of the binomials along
/// its path to the root, with multipliers in the variables of grade at
/// most `grade(v)`.
pub fn perturb_nested(rng: &mut impl Rng, p: &QuiverMorphismProblem, sol: &mut NonPureSolution, density: f64) -> Result<()> {
    let g = p.grades()?;
    let amb = sol.ambient.clone();
    for v in g.order() {
        if v == g.root {
            continue;
        }
        let gv = g.grade(&v).expect("graded");
        let mut allowed: Vec<usize> = amb.ring.parameter_indices();
        for u in g.nest(gv) {
            allowed.extend(amb.embedding[&u].iter().copied());
        }
        let binomials = amb.path_binomials(&p.domain, &v)?;
        let comps = sol.psi.get_mut(&v).expect("one entry per vertex");
        for c in comps.iter_mut() {
            for b in &binomials {
                let h = random_jet(rng, &amb.ring, 0, 2, density)
                    .filter(|m| m.support().all(|(i, _)| allowed.contains(&i)));
                *c = &*c + &(&h * b);
            }
        }
    }
    Ok(())
}

/// `exp(v)(p)` for a degree-raising derivation `v`.
fn exp_derivation(v: &[Jet], p: &Jet) -> Jet {
    let field = p.field();
    let mut term = p.clone();
    let mut out = p.clone();
    let mut k = 1i64;
    while !term.is_zero() {
        term = apply_field(v, &term);
        let Some(inv) = field.from_i64(k).inv() else {
            break;
        };
        term = term.scale(&inv);
        out.add_assign(&term);
        k += 1;
    }
    out
}

/// Weights making every ideal generator weighted-homogeneous, searched in
/// `1..=5` per free variable.
pub fn quasi_homogeneous_weights(ring: &LocalRingPresentation) -> Option<Vec<u32>> {
    let free = ring.free_indices();
    let gens = ring.ideal().generators();
    let mut w = vec![1u32; free.len()];
    loop {
        let ok = gens.iter().all(|q| {
            let mut degs = q.terms().map(|(m, _)| free.iter().zip(&w).map(|(&i, wi)| wi * m.exponent(i) as u32).sum::<u32>());
            match degs.next() {
                Some(first) => degs.all(|dg| dg == first),
                None => true,
            }
        });
        if ok {
            return Some(w);
        }
        let mut k = 0;
        loop {
            if k == w.len() {
                return None;
            }
            w[k] += 1;
            if w[k] <= 5 {
                break;
            }
            w[k] = 1;
            k += 1;
        }
    }
}

fn linear_images(ring: &Ring, m: &[Vec<Scalar>]) -> Vec<Jet> {
    let free = ring.free_indices();
    m.iter()
        .map(|row| {
            let mut j = ring.zero();
            for (a, &i) in row.iter().zip(&free) {
                j.add_term(Monomial::var(ring.nvars(), i), a.clone());
            }
            j
        })
        .collect()
}

/// A random linear automorphism preserving the ideal: a random matrix if
/// one preserves it, else a weighted scaling, else the identity.
pub fn random_linear_automorphism(rng: &mut impl Rng, ring: &Ring) -> Automorphism {
    let field = ring.field();
    let n = ring.free_indices().len();
    for _ in 0..6 {
        let m: Vec<Vec<Scalar>> = (0..n).map(|_| (0..n).map(|_| any_scalar(rng, field)).collect()).collect();
        if let Ok(a) = Automorphism::new(ring, linear_images(ring, &m)) {
            if a.validate().is_ok() {
                return a;
            }
        }
    }
    if let Some(w) = quasi_homogeneous_weights(ring) {
        let lambda = small_scalar(rng, field);
        let m: Vec<Vec<Scalar>> = (0..n)
            .map(|r| (0..n).map(|c| if r == c { lambda.pow(w[r]) } else { field.zero() }).collect())
            .collect();
        if let Ok(a) = Automorphism::new(ring, linear_images(ring, &m)) {
            if a.validate().is_ok() {
                return a;
            }
        }
    }
    Automorphism::identity(ring)
}

/// A random degree-raising vector field with `v(J) ⊆ J`.
fn random_log_field(rng: &mut impl Rng, ring: &LocalRingPresentation, basis: &[Vec<Jet>], terms: usize) -> Vec<Jet> {
    let mut v = vec![ring.zero(); ring.nvars()];
    let picks: Vec<&Vec<Jet>> = basis.choose_multiple(rng, terms.min(basis.len())).collect();
    for b in picks {
        let s = small_scalar(rng, ring.field());
        for (vi, bi) in v.iter_mut().zip(b) {
            vi.add_scaled(bi, &s);
        }
    }
    v
}

/// A random automorphism tangent to the identity: `exp(v)` of a random
/// logarithmic field in `m²`.
pub fn random_unipotent_automorphism(rng: &mut impl Rng, ring: &Ring, terms: usize) -> Automorphism {
    let basis = logarithmic_fields(ring, 2, &ring.free_indices(), |_| true);
    let v = random_log_field(rng, ring, &basis, terms);
    let images = ring.free_indices().into_iter().map(|i| exp_derivation(&v, &ring.var(i))).collect();
    match Automorphism::new(ring, images) {
        Ok(a) if a.validate().is_ok() => a,
        _ => Automorphism::identity(ring),
    }
}

/// A random automorphism `L ∘ U` together with its linear factor `L`.
pub fn random_automorphism(rng: &mut impl Rng, ring: &Ring, terms: usize) -> (Automorphism, Automorphism) {
    let l = random_linear_automorphism(rng, ring);
    let u = random_unipotent_automorphism(rng, ring, terms);
    let g = l.compose(&u).expect("same ring");
    (g, l)
}

/// A random contact element with its constant linear factor.
pub fn random_contact(rng: &mut impl Rng, source: &Ring, target: &Ring, terms: usize) -> Result<(ContactElem, ContactElem)> {
    let id = ContactElem::identity(source, target)?;
    let p = id.product().clone();
    let my = id.map_y().to_vec();
    let ys = id.y_indices();
    let embed_y = |j: &Jet| j.embed(p.vars(), &my, None);
    let lin = random_linear_automorphism(rng, target);
    let lin_c = ContactElem::new(source, target, lin.free_images().iter().map(embed_y).collect())?;
    // fibrewise exponential of r·v for a logarithmic field v of the target
    let basis = logarithmic_fields(target, 2, &target.free_indices(), |_| true);
    let mut c: Vec<Jet> = ys.iter().map(|&i| p.var(i)).collect();
    for _ in 0..terms.min(2) {
        let v = random_log_field(rng, target, &basis, 1);
        let r = random_jet(rng, &p, 0, 1, 0.5);
        let mut dv = vec![p.zero(); p.nvars()];
        for (i, vi) in v.iter().enumerate() {
            if !vi.is_zero() {
                dv[my[i]] = &r * &embed_y(vi);
            }
        }
        c = c.iter().map(|cj| exp_derivation(&dv, cj)).collect();
    }
    // an x-dependent unit scaling, weighted when the target is singular
    let weights = if target.is_smooth() {
        Some(vec![1; ys.len()])
    } else {
        quasi_homogeneous_weights(target)
    };
    if let Some(w) = weights {
        let mut lambda = random_jet(rng, &p, 1, 2, 0.3).filter(|m| ys.iter().all(|&i| m.exponent(i) == 0));
        lambda.add_term(Monomial::one(p.nvars()), p.field().one());
        let ims: Vec<Jet> = ys.iter().zip(&w).map(|(&i, &wi)| &lambda.pow(wi) * &p.var(i)).collect();
        let mut images = p.identity_images();
        for (k, &i) in ys.iter().enumerate() {
            images[i] = ims[k].clone();
        }
        c = c.iter().map(|cj| cj.substitute_unchecked(&images)).collect();
    }
    // multiples of the target ideal
    for cj in c.iter_mut() {
        for q in target.ideal().generators() {
            if rng.gen_bool(0.5) {
                let h = random_jet(rng, &p, 0, 1, 0.5);
                cj.add_assign(&(&h * &embed_y(q)));
            }
        }
    }
    let u = ContactElem::new(source, target, c)?;
    let u = if u.validate().is_ok() { u } else { id };
    Ok((lin_c.compose(&u)?, lin_c))
}

/// A random element of the group with its linear factor, usable as a seed.
pub fn random_element(
    rng: &mut impl Rng,
    tag: GroupTag,
    source: &Ring,
    target: &Ring,
    terms: usize,
) -> Result<(GroupElement, GroupElement)> {
    Ok(match tag {
        GroupTag::R => {
            let (g, l) = random_automorphism(rng, source, terms);
            (GroupElement::R(g), GroupElement::R(l))
        }
        GroupTag::L => {
            let (g, l) = random_automorphism(rng, target, terms);
            (GroupElement::L(g), GroupElement::L(l))
        }
        GroupTag::LR => {
            let (gx, lx) = random_automorphism(rng, source, terms);
            let (gy, ly) = random_automorphism(rng, target, terms);
            (GroupElement::LR(LRElem { phi_x: gx, phi_y: gy }), GroupElement::LR(LRElem { phi_x: lx, phi_y: ly }))
        }
        GroupTag::C => {
            let (g, l) = random_contact(rng, source, target, terms)?;
            (GroupElement::C(g), GroupElement::C(l))
        }
        GroupTag::K => {
            let (gx, lx) = random_automorphism(rng, source, terms);
            let (gc, lc) = random_contact(rng, source, target, terms)?;
            (GroupElement::K(KElem { phi: gx, c: gc }), GroupElement::K(KElem { phi: lx, c: lc }))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn cusp_fields_include_euler_and_hamiltonian_multiples() {
        let cusp = LocalRingPresentation::parse(&["x", "y"], &[], Field::Rational, 5, &["y^2 - x^3"]).unwrap();
        let basis = logarithmic_fields(&cusp, 2, &cusp.free_indices(), |_| true);
        assert!(!basis.is_empty());
        for v in &basis {
            let q = &cusp.ideal().generators()[0];
            assert!(cusp.is_member(&apply_field(v, q)).unwrap());
        }
    }

    #[test]
    fn random_elements_are_valid() {
        let mut rng = StdRng::seed_from_u64(7);
        let q = Field::Rational;
        let cusp = LocalRingPresentation::parse(&["x", "y"], &[], q, 5, &["y^2 - x^3"]).unwrap();
        let fat = LocalRingPresentation::parse(&["x"], &[], q, 5, &["x^3"]).unwrap();
        let smooth = LocalRingPresentation::parse(&["u", "v"], &[], q, 5, &[]).unwrap();
        for (s, t) in [(&smooth, &cusp), (&cusp, &smooth), (&fat, &cusp), (&smooth, &smooth)] {
            for tag in GroupTag::ALL {
                for _ in 0..3 {
                    let (g, l) = random_element(&mut rng, tag, s, t, 2).unwrap();
                    g.validate().unwrap();
                    l.validate().unwrap();
                }
            }
        }
    }
}
