//! Acceptance suite: one PASS/FAIL line per criterion.

#[path = "../../core/tests/common/oracle.rs"]
mod oracle;

use std::collections::HashSet;
use std::error::Error;
use std::time::Instant;

use clap::Parser as _;
use germforge_cli::commands::run;
use germforge_cli::workspace::{element_line, map_line, nested_text, tag_name, Workspace};
use germforge_cli::Cli;
use germforge_core::ifs::ring_line;
use germforge_core::sample::{
    perturb_nested, random_element, random_jet, random_map, random_tree_problem, random_unipotent_automorphism,
};
use germforge_core::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Check = Result<String, Box<dyn Error>>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+).into());
        }
    };
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit_secs: Option<f64>,
    check: fn() -> Check,
}

const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, name: "oracle equivalence over F2, F3", limit_secs: Some(60.0), check: oracle_equivalence },
    Criterion { id: 2, name: "soundness of random orbit points", limit_secs: Some(120.0), check: soundness },
    Criterion { id: 3, name: "contact linearization", limit_secs: None, check: linearization },
    Criterion { id: 4, name: "closed-form square root witness", limit_secs: None, check: closed_form },
    Criterion { id: 5, name: "purification invariant", limit_secs: Some(120.0), check: purification },
    Criterion { id: 6, name: "quiver and left-right solver coherence", limit_secs: None, check: coherence },
    Criterion { id: 7, name: "filtered subgroups", limit_secs: None, check: filtered },
    Criterion { id: 8, name: "base change and normal form examples", limit_secs: None, check: examples },
    Criterion { id: 9, name: "CLI round trips", limit_secs: None, check: cli_round_trips },
];

fn main() {
    let mut failed = 0;
    for c in CRITERIA {
        let start = Instant::now();
        let result = std::panic::catch_unwind(c.check).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()).into())
        });
        let secs = start.elapsed().as_secs_f64();
        let result = match (result, c.limit_secs) {
            (Ok(_), Some(limit)) if secs > limit => Err(format!("took {secs:.1} s, limit {limit} s").into()),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("criterion {} {}: PASS ({detail}; {secs:.1} s)", c.id, c.name),
            Err(e) => {
                failed += 1;
                println!("criterion {} {}: FAIL ({e}; {secs:.1} s)", c.id, c.name);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ring(free: &[&str], params: &[&str], field: Field, d: u32, ideal: &[&str]) -> Ring {
    LocalRingPresentation::parse(free, params, field, d, ideal).expect("valid ring")
}

// 1

fn oracle_equivalence() -> Check {
    let mut verdicts = 0;
    for (p, d) in [(2u64, 2usize), (2, 3), (3, 2), (3, 3)] {
        let field = Field::prime(p)?;
        let (x, y) = (ring(&["x"], &[], field, d as u32, &[]), ring(&["y"], &[], field, d as u32, &[]));
        let maps = oracle::all_polys(p, d, 1);
        for f in maps.iter().filter(|f| matches!(oracle::order(f), Some(1 | 2))) {
            let fm = GermMap::parse(&x, &y, &[&oracle::text(f)])?;
            for (tag, orbit) in [(GroupTag::R, oracle::right_orbit(f, p, d)), (GroupTag::K, oracle::contact_orbit(f, p, d))] {
                for ft in &maps {
                    let ftm = GermMap::parse(&x, &y, &[&oracle::text(ft)])?;
                    let rep = solve_equivalence(&SolveRequest::new(tag, &fm, &ftm, d as u32 + 1))?;
                    ensure!(rep.is_success() == orbit.contains(ft), "{tag} over F_{p}, D={d}: {f:?} vs {ft:?}");
                    if let SolveOutcome::Success { verified, .. } = rep.outcome {
                        ensure!(verified, "unverified witness for {f:?} vs {ft:?}");
                    }
                    verdicts += 1;
                }
            }
        }
    }
    Ok(format!("{verdicts} verdicts agree"))
}

// 2

/// Sources and targets with at most two variables, smooth and singular.
struct Rings {
    sources: Vec<Ring>,
    targets: Vec<Ring>,
}

fn instance_rings(d: u32) -> Rings {
    let q = Field::Rational;
    Rings {
        sources: vec![
            ring(&["x"], &[], q, d, &[]),
            ring(&["x", "z"], &[], q, d, &[]),
            ring(&["x"], &[], q, d, &["x^3"]),
            ring(&["x", "z"], &[], q, d, &["z^2 - x^3"]),
        ],
        targets: vec![
            ring(&["y"], &[], q, d, &[]),
            ring(&["y", "w"], &[], q, d, &[]),
            ring(&["u", "v"], &[], q, d, &["v^2 - u^3"]),
        ],
    }
}

/// A random valid map; into the cusp through `(h², h³)`.
fn instance_map(rng: &mut StdRng, source: &Ring, target: &Ring) -> Result<GermMap, Box<dyn Error>> {
    if target.is_smooth() {
        return Ok(random_map(rng, source, target, 1, 0.4)?);
    }
    let h = random_jet(rng, source, 1, 2, 0.7);
    Ok(GermMap::new(source, target, vec![h.pow(2), h.pow(3)])?)
}

fn soundness() -> Check {
    let mut rng = StdRng::seed_from_u64(2);
    let d = 6;
    let rings = instance_rings(d);
    let mut singular = 0;
    for tag in GroupTag::ALL {
        for i in 0..200 {
            let s = &rings.sources[i % rings.sources.len()];
            let t = &rings.targets[(i / rings.sources.len()) % rings.targets.len()];
            if !s.is_smooth() || !t.is_smooth() {
                singular += 1;
            }
            let f = instance_map(&mut rng, s, t)?;
            let (g, seed) = random_element(&mut rng, tag, s, t, 2)?;
            let ft = g.apply(&f)?;
            let rep = solve_equivalence(&SolveRequest::new(tag, &f, &ft, d + 1).seed(seed))?;
            let SolveOutcome::Success { witness, verified, .. } = &rep.outcome else {
                return Err(format!("{tag} #{i}: {f} vs {ft}: {:?}", rep.outcome).into());
            };
            ensure!(*verified, "{tag} #{i}: unverified");
            let back = witness.apply(&f)?;
            for (a, b) in back.components().iter().zip(ft.components()) {
                let r = s.normal_form(&(a - b).retrunc(d))?;
                ensure!(r.is_zero(), "{tag} #{i}: residual {r}");
            }
        }
    }
    Ok(format!("1000 instances, {singular} with singular rings, zero residuals"))
}

// 3

/// Every `u · f(φ)` with `u` a unit and `φ` an automorphism.
fn linear_contact_orbit(f: &oracle::Poly, p: u64, d: usize) -> HashSet<oracle::Poly> {
    let right = oracle::right_orbit(f, p, d);
    let units: Vec<oracle::Poly> = oracle::all_polys(p, d, 0).into_iter().filter(|u| u[0] != 0).collect();
    let mut out = HashSet::new();
    for g in &right {
        for u in &units {
            out.insert(oracle::mul(u, g, p, d));
        }
    }
    out
}

fn linearization() -> Check {
    let mut rng = StdRng::seed_from_u64(3);
    let mut equivalent = 0;
    for i in 0..100 {
        let (p, d) = if i % 2 == 0 { (3u64, 3usize) } else { (5, 3) };
        let field = Field::prime(p)?;
        let (x, y) = (ring(&["x"], &[], field, d as u32, &[]), ring(&["y"], &[], field, d as u32, &[]));
        let maps = oracle::all_polys(p, d, 1);
        let f = &maps[rng.gen_range(0..maps.len())];
        let orbit = linear_contact_orbit(f, p, d);
        let ft = if rng.gen_bool(0.5) {
            let pts: Vec<&oracle::Poly> = orbit.iter().collect();
            let mut pts = pts;
            pts.sort();
            pts[rng.gen_range(0..pts.len())].clone()
        } else {
            maps[rng.gen_range(0..maps.len())].clone()
        };
        let fm = GermMap::parse(&x, &y, &[&oracle::text(f)])?;
        let ftm = GermMap::parse(&x, &y, &[&oracle::text(&ft)])?;
        let rep = solve_equivalence(&SolveRequest::new(GroupTag::K, &fm, &ftm, d as u32 + 1))?;
        ensure!(rep.is_success() == orbit.contains(&ft), "F_{p}: {f:?} vs {ft:?}: {:?}", rep.outcome);
        if let Some(GroupElement::K(k)) = rep.witness() {
            equivalent += 1;
            let l = linearize_contact(&k.c, &k.phi, &fm)?;
            ensure!(l.act(&fm)?.equal_mod(&ftm, d as u32 + 1)?, "linearized witness misses {ft:?}");
        }
    }
    let d = 5;
    let q = Field::Rational;
    let sources = [ring(&["x"], &[], q, d, &[]), ring(&["x", "z"], &[], q, d, &[]), ring(&["x"], &[], q, d, &["x^3"])];
    let cusp = ring(&["u", "v"], &[], q, d, &["v^2 - u^3"]);
    for i in 0..100 {
        let s = &sources[i % sources.len()];
        let f = instance_map(&mut rng, s, &cusp)?;
        let (g, seed) = random_element(&mut rng, GroupTag::K, s, &cusp, 2)?;
        let ft = g.apply(&f)?;
        let rep = solve_equivalence(&SolveRequest::new(GroupTag::K, &f, &ft, d + 1).seed(seed))?;
        let Some(GroupElement::K(k)) = rep.witness() else {
            return Err(format!("singular target #{i}: {:?}", rep.outcome).into());
        };
        let l = linearize_contact(&k.c, &k.phi, &f)?;
        l.validate()?;
        // U·(f∘Φ⁻¹) against C(x, f∘Φ⁻¹), term by term
        let lin = l.act(&f)?;
        let contact = GroupElement::K(k.clone()).apply(&f)?;
        ensure!(lin.components() == contact.components(), "singular target #{i}: {lin} vs {contact}");
    }
    Ok(format!("100 smooth-target verdicts ({equivalent} equivalent), 100 singular-target witnesses"))
}

// 4

fn closed_form() -> Check {
    let q = Field::Rational;
    let (x, y) = (ring(&["x"], &[], q, 5, &[]), ring(&["y"], &[], q, 5, &[]));
    let f = GermMap::parse(&x, &y, &["x^2"])?;
    let ft = GermMap::parse(&x, &y, &["x^2 + x^3"])?;
    let rep = solve_equivalence(&SolveRequest::new(GroupTag::R, &f, &ft, 5))?;
    let SolveOutcome::Success { unknowns, .. } = rep.outcome else {
        return Err("no witness".into());
    };
    let psi = &unknowns[0].1[0];
    let coeffs: Vec<String> = (1..=4).map(|k| psi.coeff(&Monomial::from_exponents(vec![k])).to_string()).collect();
    ensure!(coeffs == ["1", "1/2", "-1/8", "0"], "coefficients {coeffs:?}");
    Ok(coeffs.join(", "))
}

// 5

fn purification() -> Check {
    let mut rng = StdRng::seed_from_u64(5);
    let mut steps = 0;
    for i in 0..50 {
        let n = rng.gen_range(2..=6);
        let (p, pure) = random_tree_problem(&mut rng, n, Field::Rational, 5, 0.3)?;
        let clean = NonPureSolution::from_pure(&p, &pure, 6)?;
        let mut sol = clean.clone();
        while sol == clean {
            perturb_nested(&mut rng, &p, &mut sol, 0.3)?;
        }
        let out = purify(&sol, &p)?;
        ensure!(out.steps.iter().all(|s| s.holds), "tree #{i}: a step broke an edge condition");
        ensure!(out.verified, "tree #{i}: output not verified");
        for m in &out.morphisms {
            ensure!(Some(&m.domain) == p.domain.ring(&m.vertex), "tree #{i}: impure morphism at {}", m.vertex);
        }
        ensure!(check_rectangles(&p, &out.morphisms, 6)?.is_empty(), "tree #{i}: rectangles fail");
        steps += out.steps.len();
    }
    Ok(format!("50 trees, {steps} specialization steps"))
}

// 6

fn coherence() -> Check {
    let mut rng = StdRng::seed_from_u64(6);
    let q = Field::Rational;
    let d = 5;
    let sources = [ring(&["x"], &[], q, d, &[]), ring(&["x", "z"], &[], q, d, &[])];
    let y = ring(&["y"], &[], q, d, &[]);
    let mut successes = 0;
    for i in 0..100 {
        let x = &sources[usize::from(i % 5 == 4)];
        let f = random_map(&mut rng, x, &y, 1, 0.5)?;
        let ft = if rng.gen_bool(0.7) {
            random_element(&mut rng, GroupTag::LR, x, &y, 2)?.0.apply(&f)?
        } else {
            random_map(&mut rng, x, &y, 1, 0.5)?
        };
        let spec = |m: &GermMap| {
            QuiverSpec::new()
                .vertex("X", x)
                .vertex("Y", &y)
                .edge("X", "Y", m.clone())
                .constraint("X", ConstraintKind::Invertible)
                .constraint("Y", ConstraintKind::Invertible)
        };
        let p = QuiverMorphismProblem::new(spec(&ft), spec(&f))?;
        let a = solve_quiver(&p, d + 1)?;
        let b = solve_equivalence(&SolveRequest::new(GroupTag::LR, &f, &ft, d + 1))?;
        ensure!(a.is_success() == b.is_success(), "#{i}: {f} vs {ft}: quiver {} / LR {}", a.is_success(), b.is_success());
        if let (Some(ma), Some(mb), Some(w)) = (a.morphism("X"), a.morphism("Y"), b.witness()) {
            successes += 1;
            let phi_x = Automorphism::new(x, ma.free_images())?.inverse()?;
            let phi_y = Automorphism::new(&y, mb.free_images())?.inverse()?;
            let from_quiver = GroupElement::LR(LRElem { phi_x, phi_y }).apply(&f)?;
            ensure!(from_quiver.equal_mod(&ft, d + 1)?, "#{i}: quiver witness misses f̃");
            ensure!(w.apply(&f)?.equal_mod(&ft, d + 1)?, "#{i}: LR witness misses f̃");
        }
    }
    Ok(format!("100 instances, {successes} equivalent"))
}

// 7

fn filtered() -> Check {
    let mut rng = StdRng::seed_from_u64(7);
    let q = Field::Rational;
    let d = 5;
    let x = ring(&["x", "z"], &[], q, d, &[]);
    let y = ring(&["y", "w"], &[], q, d, &[]);
    for i in 0..100 {
        let (tag, r) = if i % 2 == 0 { (GroupTag::R, &x) } else { (GroupTag::L, &y) };
        let wrap = |a: Automorphism| if tag == GroupTag::R { GroupElement::R(a) } else { GroupElement::L(a) };
        let g = wrap(random_unipotent_automorphism(&mut rng, r, 2));
        let h = wrap(random_unipotent_automorphism(&mut rng, r, 2));
        let spec = FilteredSubgroupSpec::maximal(tag, 1, &x);
        ensure!(filtered_member(&g, &spec)? && filtered_member(&h, &spec)?, "#{i}: generator outside level 1");
        ensure!(filtered_member(&g.compose(&h)?, &spec)?, "#{i}: {tag} product leaves level 1");
    }
    let mut members = 0;
    for i in 0..100 {
        let j = rng.gen_range(1..=3);
        let lo = rng.gen_range(2..=4);
        let images: Vec<Jet> = x
            .free_indices()
            .into_iter()
            .map(|k| &x.var(k) + &random_jet(&mut rng, &x, lo, d, 0.3))
            .collect();
        let phi = Automorphism::new(&x, images)?;
        // Φ(x) - x ∈ m^(j+1), read off the terms
        let expected = phi
            .free_images()
            .iter()
            .zip(x.free_indices())
            .all(|(im, k)| (im - &x.var(k)).terms().all(|(m, _)| m.degree() > j));
        let got = filtered_member(&GroupElement::R(phi), &FilteredSubgroupSpec::maximal(GroupTag::R, j, &x))?;
        ensure!(got == expected, "#{i}: level {j}: membership {got}, characterization {expected}");
        members += usize::from(got);
    }
    Ok(format!("100 products closed; 100 memberships match ({members} members)"))
}

// 8

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// `x (1 + t x³)^(1/2)` with terms of total degree at most `d`.
fn square_root_oracle(d: u32) -> String {
    let (mut num, mut den) = (1i64, 1i64);
    let mut terms = Vec::new();
    for k in 0u32.. {
        if 4 * k + 1 > d {
            break;
        }
        let c = if den == 1 { format!("{num}") } else { format!("{num}/{den}") };
        terms.push(format!("({c}) t^{k} x^{}", 3 * k + 1));
        // binom(1/2, k+1) = binom(1/2, k) · (1/2 - k) / (k + 1)
        num *= 1 - 2 * k as i64;
        den *= 2 * (k as i64 + 1);
        let g = gcd(num, den);
        (num, den) = (num / g, den / g);
    }
    terms.join(" + ")
}

fn examples() -> Check {
    let q = Field::Rational;
    let d = 8;
    let x = ring(&["x"], &["t"], q, d, &[]);
    let y = ring(&["y"], &["t"], q, d, &[]);
    let f = GermMap::parse(&x, &y, &["x^2 + t x^3"])?;
    let ft = GermMap::parse(&x, &y, &["x^2 + t^2 x^3"])?;
    let spec = |m: &GermMap| {
        QuiverSpec::new()
            .vertex("X", &x)
            .vertex("Y", &y)
            .edge("X", "Y", m.clone())
            .constraint("X", ConstraintKind::Identity)
            .constraint("Y", ConstraintKind::Identity)
    };
    let p = QuiverMorphismProblem::new(spec(&ft), spec(&f))?;
    let rep = solve_with_base_change(&p, d + 1)?;
    let QuiverOutcome::Success { base: Some(base), verified, .. } = &rep.outcome else {
        return Err(format!("base change: {:?}", rep.outcome).into());
    };
    ensure!(*verified, "base change unverified");
    ensure!(base[0].to_text() == "t^2", "base {}", base[0]);
    ensure!(!solve_quiver(&p, d + 1)?.is_success(), "the fixed base should be obstructed");

    let mut found = Vec::new();
    for d in [8, 12] {
        let x = ring(&["x"], &["t"], q, d, &[]);
        let y = ring(&["y"], &["t"], q, d, &[]);
        let fam = GermMap::parse(&x, &y, &["x^2 + t x^5"])?;
        let basis = vec![vec![x.parse_jet("x^3")?]];
        let rep = unfolding_normal_form(&NormalFormRequest { group: GroupTag::R, family: fam, basis, degree: d + 1 })?;
        let NormalFormOutcome::Success { coefficients, substitution, verified, .. } = &rep.outcome else {
            return Err(format!("normal form at D={d}: {:?}", rep.outcome).into());
        };
        ensure!(*verified, "normal form at D={d} unverified");
        ensure!(coefficients[0].is_zero(), "c = {}", coefficients[0]);
        let expected = x.parse_jet(&square_root_oracle(d))?;
        ensure!(substitution[0] == expected, "D={d}: φ = {} against {}", substitution[0], expected);
        found.push(substitution[0].to_text());
    }
    let x = ring(&["x"], &["t"], q, 6, &[]);
    let y = ring(&["y"], &["t"], q, 6, &[]);
    let fam = GermMap::parse(&x, &y, &["x^2 + t x^3"])?;
    let rep = unfolding_normal_form(&NormalFormRequest {
        group: GroupTag::R,
        family: fam,
        basis: vec![vec![x.parse_jet("x^3")?]],
        degree: 7,
    })?;
    let NormalFormOutcome::Success { coefficients, .. } = &rep.outcome else {
        return Err("x^2 + t x^3 not in normal form".into());
    };
    ensure!(coefficients[0].to_text() == "t", "c = {}", coefficients[0]);
    Ok(format!("base t^2; φ = {}", found.join(" | ")))
}

// 9

fn cli(args: &[&str]) -> germforge_cli::commands::Output {
    let mut full = vec!["germforge"];
    full.extend_from_slice(args);
    run(&Cli::parse_from(full))
}

fn ring_names(r: &Ring) -> Vec<String> {
    r.vars().names().to_vec()
}

fn cli_round_trips() -> Check {
    let mut rng = StdRng::seed_from_u64(9);
    let dir = tempfile::tempdir()?;
    let q = Field::Rational;
    let d = 5;
    let rings = instance_rings(d);
    let names = ["X1", "X2", "F", "Cs"];
    let tnames = ["Y1", "Y2", "Cu"];
    let mut header = String::from("field Q\n");
    for (n, r) in names.iter().zip(&rings.sources) {
        header.push_str(&ring_line(n, r));
        header.push('\n');
    }
    for (n, r) in tnames.iter().zip(&rings.targets) {
        header.push_str(&ring_line(n, r));
        header.push('\n');
    }
    let mut witnesses = 0;
    let mut workspaces = 0;
    for tag in GroupTag::ALL {
        for i in 0..20 {
            let si = rng.gen_range(0..names.len());
            let ti = rng.gen_range(0..tnames.len());
            let (s, t) = (&rings.sources[si], &rings.targets[ti]);
            let f = instance_map(&mut rng, s, t)?;
            let (g, seed) = random_element(&mut rng, tag, s, t, 2)?;
            let ft = g.apply(&f)?;
            let mut text = header.clone();
            for (n, m) in [("f", &f), ("ft", &ft)] {
                text.push_str(&map_line(n, names[si], tnames[ti], m.components()));
                text.push('\n');
            }
            for (n, e) in [("g", &g), ("seed", &seed)] {
                text.push_str(&element_line(n, names[si], tnames[ti], e).expect("printable"));
                text.push('\n');
            }
            // the workspace itself
            let ws = Workspace::parse(&text)?;
            ensure!(Workspace::parse(&ws.to_text())? == ws, "{tag} #{i}: workspace changed on re-parse");
            ensure!(Workspace::parse(&ws.to_text())?.to_text() == ws.to_text(), "{tag} #{i}: unstable printing");
            ensure!(ws.element("g").map(|e| &e.element) == Some(&g), "{tag} #{i}: element changed in print");
            workspaces += 1;
            let path = dir.path().join(format!("{}_{i}.gf", tag_name(tag)));
            std::fs::write(&path, &text)?;
            let deg = (d + 1).to_string();
            let out = cli(&[
                "solve",
                path.to_str().unwrap(),
                "--group",
                tag_name(tag),
                "--lhs",
                "ft",
                "--rhs",
                "f",
                "--degree",
                &deg,
                "--seed",
                "seed",
            ]);
            ensure!(out.exit_code() == 0, "{tag} #{i}: {}", out.rendered());
            let report: serde_json::Value = serde_json::from_str(&out.rendered())?;
            ensure!(report["schema"] == "germforge.report/1", "{tag} #{i}: schema");
            let line = report["witness"]["element"].as_str().ok_or("no element")?;
            let mut again = ws.clone();
            again.extend(line)?;
            let w = &again.element("witness").ok_or("witness not declared")?.element;
            ensure!(
                element_line("witness", names[si], tnames[ti], w).as_deref() == Some(line),
                "{tag} #{i}: witness text changed on re-parse"
            );
            ensure!(w.apply(&f)?.equal_mod(&ft, d + 1)?, "{tag} #{i}: re-parsed witness misses f̃");
            witnesses += 1;
        }
    }
    for i in 0..20 {
        let n = rng.gen_range(2..=5);
        let (p, pure) = random_tree_problem(&mut rng, n, q, 4, 0.3)?;
        let mut text = String::from("field Q\n");
        let mut quivers = String::new();
        for (qname, spec, prefix) in [("Qd", &p.domain, "D"), ("Qc", &p.codomain, "C")] {
            let mut body = String::new();
            for (v, r) in &spec.vertices {
                let rn = format!("{prefix}{v}");
                text.push_str(&ring_line(&rn, r));
                text.push('\n');
                body.push_str(&format!("  vertex {v} ring {rn};\n"));
                if rng.gen_bool(0.3) {
                    body.push_str(&format!("  constraint {v} invertible;\n"));
                }
            }
            for e in &spec.edges {
                let mn = format!("{prefix}{}_{}", e.from, e.to);
                text.push_str(&map_line(&mn, &format!("{prefix}{}", e.from), &format!("{prefix}{}", e.to), e.map.components()));
                text.push('\n');
                body.push_str(&format!("  edge {} -> {} map {mn};\n", e.from, e.to));
            }
            quivers.push_str(&format!("quiver {qname} {{\n{body}}}\n"));
        }
        text.push_str(&quivers);
        let mut sol = NonPureSolution::from_pure(&p, &pure, 5)?;
        perturb_nested(&mut rng, &p, &mut sol, 0.3)?;
        text.push_str(&nested_text("s", "Qd", "Qc", &sol));
        let ws = Workspace::parse(&text)?;
        ensure!(Workspace::parse(&ws.to_text())? == ws, "tree #{i}: workspace changed on re-parse");
        ensure!(ws.nested_solution("s").map(|n| &n.solution) == Some(&sol), "tree #{i}: nested solution changed");
        ensure!(ring_names(&ws.nested_solution("s").unwrap().solution.ambient.ring) == ring_names(&sol.ambient.ring), "names");
        workspaces += 1;
        let path = dir.path().join(format!("tree_{i}.gf"));
        std::fs::write(&path, ws.to_text())?;
        let out = cli(&["quiver", "purify", path.to_str().unwrap(), "--solution", "s"]);
        ensure!(out.exit_code() == 0, "tree #{i}: purify: {}", out.rendered());
        let emit = dir.path().join(format!("tree_{i}_sol.gf"));
        let out = cli(&[
            "quiver", "solve", path.to_str().unwrap(), "--domain", "Qd", "--codomain", "Qc", "--degree", "5", "--emit",
            emit.to_str().unwrap(),
        ]);
        if out.exit_code() == 0 {
            let mut again = ws.clone();
            again.extend(&std::fs::read_to_string(&emit)?)?;
            let sol = &again.nested_solution("sol").ok_or("emitted solution missing")?.solution;
            let rep = purify(sol, &p)?;
            ensure!(rep.verified, "tree #{i}: emitted solution does not re-verify");
            witnesses += 1;
        }
    }
    Ok(format!("{witnesses} witnesses and {workspaces} workspaces re-parse and re-verify"))
}
