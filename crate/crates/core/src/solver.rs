//! Order-by-order equivalence solving.
//!
//! Witnesses are sought in substitution form: the unknowns are `ψ = Φ⁻¹`
//! for source automorphisms, so that `f̃ = f∘ψ` (ℛ), `f̃ = Φ_Y(f∘ψ)` (ℒℛ)
//! and `f̃ = C(x, f∘ψ)` (𝒦) are polynomial in the unknowns. Reports carry
//! both the group element and the raw unknowns.

use std::fmt;
use std::sync::Arc;

use crate::build::{free_labels, ideal_with, identity_images, monomials, ring_ideal, Builder};
use crate::engine::{self, Method, SearchLimits, SearchResult, StageLog, Status, System};
use crate::error::{Error, Result};
use crate::expr::{konst, sub, subst, unknown, E};
use crate::field::Field;
use crate::germs::{GermMap, LocalRingPresentation, Ring};
use crate::groups::{
    filtered_member, Automorphism, ContactElem, FilteredSubgroupSpec, GroupElement, GroupTag, KElem, LRElem,
};
use crate::ideal::IdealJet;
use crate::jet::Jet;

/// Which unknown a constraint restricts.
#[derive(Clone, Debug, PartialEq)]
pub enum Scope {
    /// The source automorphism `Φ_X`.
    Source,
    /// The target automorphism `Φ_Y`, or the contact element `C`.
    Target,
    /// The morphism at a quiver vertex.
    Vertex(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintKind {
    /// The unknown is the identity.
    Identity,
    /// `Φ(x) - x ∈ 𝔞` (generators of `𝔞` in the unknown's domain ring).
    IdealOffset(Vec<Jet>),
    /// `Φ^#(I_Z) ⊆ I_Z̃`: `from` in the codomain ring, `into` in the domain.
    MapsSubgerm { from: Vec<Jet>, into: Vec<Jet> },
    /// `Φ^#(m) ⊆ 𝔞̃` (generators in the domain ring).
    VanishInto(Vec<Jet>),
    /// The linear part is invertible.
    Invertible,
    /// Membership in `𝒢^(j)` for the filtration by powers of `I`
    /// (default: the maximal ideal).
    FilteredLevel { level: u32, ideal: Option<Vec<Jet>> },
    /// The variables of the named block are fixed.
    FrozenBlock(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub scope: Scope,
    pub kind: ConstraintKind,
}

impl Constraint {
    pub fn new(scope: Scope, kind: ConstraintKind) -> Constraint {
        Constraint { scope, kind }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |g: &[Jet]| g.iter().map(|j| j.to_text()).collect::<Vec<_>>().join("; ");
        match self {
            ConstraintKind::Identity => write!(f, "identity"),
            ConstraintKind::IdealOffset(g) => write!(f, "ideal_offset [{}]", list(g)),
            ConstraintKind::MapsSubgerm { from, into } => {
                write!(f, "maps_subgerm [{}] [{}]", list(from), list(into))
            }
            ConstraintKind::VanishInto(g) => write!(f, "vanish_into [{}]", list(g)),
            ConstraintKind::Invertible => write!(f, "invertible"),
            ConstraintKind::FilteredLevel { level, ideal: None } => write!(f, "filtered_level {level}"),
            ConstraintKind::FilteredLevel { level, ideal: Some(g) } => {
                write!(f, "filtered_level {level} [{}]", list(g))
            }
            ConstraintKind::FrozenBlock(b) => write!(f, "frozen_block {b}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveRequest {
    pub group: GroupTag,
    pub f: GermMap,
    pub f_tilde: GermMap,
    pub degree: u32,
    pub constraints: Vec<Constraint>,
    pub seed: Option<GroupElement>,
}

impl SolveRequest {
    /// Seek `g` with `f̃ ≡ g·f mod J_X + m^degree`.
    pub fn new(group: GroupTag, f: &GermMap, f_tilde: &GermMap, degree: u32) -> SolveRequest {
        SolveRequest { group, f: f.clone(), f_tilde: f_tilde.clone(), degree, constraints: Vec::new(), seed: None }
    }

    pub fn constraint(mut self, c: Constraint) -> SolveRequest {
        self.constraints.push(c);
        self
    }

    pub fn seed(mut self, g: GroupElement) -> SolveRequest {
        self.seed = Some(g);
        self
    }
}

/// How far an obstruction refutes equivalence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// An invariant (the order of the map) differs: no element works.
    Invariant,
    /// Exhaustive search over a finite field found no element.
    Exhaustive,
    /// Constraints pin the linear parts, so no other branch exists.
    Pinned,
    /// Only the seeded linear parts were explored.
    Seed,
    /// A solution was found but violates a filtered-level constraint.
    Filtered,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Invariant => "invariant",
            Branch::Exhaustive => "exhaustive",
            Branch::Pinned => "pinned",
            Branch::Seed => "seed",
            Branch::Filtered => "filtered",
        })
    }
}

#[derive(Clone, Debug)]
pub enum SolveOutcome {
    Success {
        witness: GroupElement,
        /// Raw unknowns by block name (e.g. `psi`, `PhiY`, `C`).
        unknowns: Vec<(String, Vec<Jet>)>,
        /// Re-application of the witness reproduces `f̃`.
        verified: bool,
    },
    Obstructed { order: u32, residual: Vec<(String, Jet)>, branch: Branch },
    /// The leading-order equations are not met by the seeded linear parts.
    SeedRequired { order: u32, residual: Vec<(String, Jet)> },
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub group: GroupTag,
    pub degree: u32,
    pub outcome: SolveOutcome,
    pub log: Vec<StageLog>,
    pub method: Method,
}

impl SolveReport {
    pub fn is_success(&self) -> bool {
        matches!(self.outcome, SolveOutcome::Success { .. })
    }

    pub fn witness(&self) -> Option<&GroupElement> {
        match &self.outcome {
            SolveOutcome::Success { witness, .. } => Some(witness),
            _ => None,
        }
    }

    /// Obstruction order, if any.
    pub fn obstruction_order(&self) -> Option<u32> {
        match &self.outcome {
            SolveOutcome::Success { .. } => None,
            SolveOutcome::Obstructed { order, .. } | SolveOutcome::SeedRequired { order, .. } => Some(*order),
        }
    }
}

/// Smallest `k < d` with some component outside `J + m^(k+1)`, else `d`.
pub fn map_order(f: &GermMap, d: u32) -> u32 {
    let src = f.source();
    for k in 0..d.min(src.trunc() + 1) {
        for c in f.components() {
            if !src.is_member(&c.retrunc(k)).unwrap_or(true) {
                return k;
            }
        }
    }
    d
}

/// Block indices of a compiled group system.
#[derive(Clone, Debug, Default)]
pub(crate) struct GroupBlocks {
    pub psi: Option<usize>,
    pub phi_y: Option<usize>,
    pub c: Option<usize>,
    pub phi_aux: Option<usize>,
    /// Blocks whose linear parts are fixed by constraints.
    pub pinned: Vec<usize>,
    pub product: Option<(Ring, Vec<usize>, Vec<usize>)>,
}

/// Starting values in substitution form from an optional seed.
struct Start {
    psi: Option<Vec<Jet>>,
    phi_y: Option<Vec<Jet>>,
    c: Option<Vec<Jet>>,
}

fn start_values(seed: Option<&GroupElement>) -> Result<Start> {
    let mut s = Start { psi: None, phi_y: None, c: None };
    let Some(g) = seed else {
        return Ok(s);
    };
    g.validate()?;
    match g {
        GroupElement::R(p) => s.psi = Some(p.inverse()?.free_images()),
        GroupElement::L(p) => s.phi_y = Some(p.free_images()),
        GroupElement::LR(e) => {
            s.psi = Some(e.phi_x.inverse()?.free_images());
            s.phi_y = Some(e.phi_y.free_images());
        }
        GroupElement::C(c) => s.c = Some(c.components().to_vec()),
        GroupElement::K(k) => {
            s.psi = Some(k.phi.inverse()?.free_images());
            s.c = Some(k.c.components().to_vec());
        }
        GroupElement::Linear(_) => return Err(Error::Unsupported("linearized contact seeds".into())),
    }
    Ok(s)
}

/// Support and linear-part settings of one unknown after constraints.
pub(crate) struct Shape {
    pub supports: Vec<Vec<crate::vars::Monomial>>,
    pub linear: Option<Vec<usize>>,
    pub values: Vec<Jet>,
    pub pinned: bool,
}

pub(crate) fn shape_for(
    ring: &Ring,
    vars_for_support: &Ring,
    linear_vars: Vec<usize>,
    start: Vec<Jet>,
    identity: Vec<Jet>,
    keep: &dyn Fn(&crate::vars::Monomial) -> bool,
    constraints: &[&ConstraintKind],
) -> Result<Shape> {
    let n = vars_for_support.nvars();
    let d = vars_for_support.trunc();
    let mut min_degree = 1;
    let mut fixed = false;
    let mut frozen_vars: Vec<usize> = Vec::new();
    for c in constraints {
        match c {
            ConstraintKind::Identity => fixed = true,
            ConstraintKind::FilteredLevel { level, .. } => min_degree = min_degree.max(level + 1),
            ConstraintKind::FrozenBlock(name) => {
                let blk = ring
                    .vars()
                    .blocks()
                    .iter()
                    .find(|b| &b.name == name)
                    .ok_or_else(|| Error::Domain(format!("unknown block {name}")))?;
                frozen_vars.extend(blk.start..blk.start + blk.len);
            }
            _ => {}
        }
    }
    let free = ring.free_indices();
    let all = monomials(n, 1, d, keep);
    let mut supports = Vec::new();
    let mut values = Vec::new();
    for (k, &i) in free.iter().enumerate() {
        if fixed || frozen_vars.contains(&i) {
            supports.push(Vec::new());
            values.push(identity[k].clone());
        } else {
            // perturbations of the identity below `min_degree` are excluded
            let sup: Vec<_> = all.iter().filter(|m| m.degree() >= min_degree).cloned().collect();
            supports.push(sup);
            values.push(if min_degree > 1 { identity[k].clone() } else { start[k].clone() });
        }
    }
    let pinned = fixed || min_degree > 1 || free.iter().all(|i| frozen_vars.contains(i));
    let linear = if min_degree > 1 || fixed { None } else { Some(linear_vars) };
    Ok(Shape { supports, linear, values, pinned })
}

/// Compiles a group equivalence problem into an engine system.
pub(crate) fn compile(req: &SolveRequest, matching: bool) -> Result<(System, GroupBlocks)> {
    let f = &req.f;
    let ft = &req.f_tilde;
    let x = f.source().clone();
    let y = f.target().clone();
    let field = x.field();
    let dd = x.trunc();
    let start = start_values(req.seed.as_ref())?;
    let mut b = Builder::new(field);
    let mut gb = GroupBlocks::default();
    let tag = req.group;

    let scoped = |s: Scope| -> Vec<&ConstraintKind> {
        req.constraints.iter().filter(|c| c.scope == s).map(|c| &c.kind).collect()
    };
    let src_c = scoped(Scope::Source);
    let tgt_c = scoped(Scope::Target);
    if req.constraints.iter().any(|c| matches!(c.scope, Scope::Vertex(_))) {
        return Err(Error::Domain("vertex constraints belong to quiver problems".into()));
    }
    if !src_c.is_empty() && !tag.acts_on_source() {
        return Err(Error::Domain(format!("group {tag} has no source automorphism to constrain")));
    }
    let target_filtered = tgt_c.iter().any(|c| matches!(c, ConstraintKind::FilteredLevel { .. }));
    if target_filtered && !y.is_smooth() {
        return Err(Error::Unsupported(
            "filtered-level constraints on target-side groups need a smooth target".into(),
        ));
    }

    // target-side unknowns first: their columns take pivots first
    if matches!(tag, GroupTag::L | GroupTag::LR) {
        let ident = y.free_indices().into_iter().map(|i| y.var(i)).collect::<Vec<_>>();
        let sv = start.phi_y.clone().unwrap_or_else(|| ident.clone());
        let sh = shape_for(&y, &y, y.free_indices(), sv, ident, &|_| true, &tgt_c)?;
        let blk = b.block("PhiY", y.vars(), free_labels("PhiY", &y), sh.values, sh.supports, sh.linear);
        if sh.pinned {
            gb.pinned.push(blk);
        }
        gb.phi_y = Some(blk);
        let ims = b.automorphism_images(blk, &y, &|i| konst(y.var(i)));
        b.preserve_ideal("valid.PhiY", &y, &ims, &ring_ideal(&y), dd);
        compile_offsets(&mut b, &y, blk, &ims, &tgt_c)?;
    }
    if matches!(tag, GroupTag::C | GroupTag::K) {
        let (p, mx, my) = LocalRingPresentation::product(&x, &y)?;
        let ys: Vec<usize> = y.free_indices().into_iter().map(|j| my[j]).collect();
        let ident: Vec<Jet> = ys.iter().map(|&i| p.var(i)).collect();
        let sv = start.c.clone().unwrap_or_else(|| ident.clone());
        let ys_keep = ys.clone();
        let keep = move |m: &crate::vars::Monomial| ys_keep.iter().any(|&i| m.exponent(i) > 0);
        let sh = shape_for(&y, &p, ys.clone(), sv, ident, &keep, &tgt_c)?;
        let blk = b.block("C", p.vars(), free_labels("C", &y), sh.values, sh.supports, sh.linear);
        if sh.pinned {
            gb.pinned.push(blk);
        }
        gb.c = Some(blk);
        // q(x, C(x, y)) ∈ J_X + J_Y
        let mut ims: Vec<E> = identity_images(&p);
        for (k, &i) in ys.iter().enumerate() {
            ims[i] = unknown(blk, k);
        }
        for (i, q) in y.ideal().generators().iter().enumerate() {
            let qp = q.embed(p.vars(), &my, None);
            b.equation(format!("valid.C[{i}]"), subst(konst(qp), ims.clone()), ring_ideal(&p), dd);
        }
        gb.product = Some((p, mx, my));
    }
    let mut psi_images: Option<Vec<E>> = None;
    if tag.acts_on_source() {
        let ident = x.free_indices().into_iter().map(|i| x.var(i)).collect::<Vec<_>>();
        let sv = start.psi.clone().unwrap_or_else(|| ident.clone());
        let plain: Vec<&ConstraintKind> =
            src_c.iter().copied().filter(|c| !matches!(c, ConstraintKind::FilteredLevel { .. })).collect();
        let sh = shape_for(&x, &x, x.free_indices(), sv.clone(), ident.clone(), &|_| true, &plain)?;
        let blk = b.block("psi", x.vars(), free_labels("psi", &x), sh.values, sh.supports, sh.linear);
        if sh.pinned {
            gb.pinned.push(blk);
        }
        gb.psi = Some(blk);
        let ims = b.automorphism_images(blk, &x, &|i| konst(x.var(i)));
        b.preserve_ideal("valid.psi", &x, &ims, &ring_ideal(&x), dd);
        // 𝒢^(j) is a subgroup, so the level can be imposed on ψ = Φ⁻¹
        for c in &src_c {
            if let ConstraintKind::FilteredLevel { level, ideal } = c {
                let i_gens = ideal.clone().unwrap_or_else(|| x.free_indices().into_iter().map(|i| x.var(i)).collect());
                let ii = IdealJet::new(x.vars(), field, dd, i_gens.clone())?;
                let test = Arc::new(ii.power(level + 1).sum(x.ideal())?);
                for (k, q) in i_gens.iter().enumerate() {
                    let e = sub(subst(konst(q.clone()), ims.clone()), konst(q.clone()));
                    b.equation(format!("filtered.psi[{k}]"), e, test.clone(), dd);
                }
            }
        }
        // constraints on Φ itself go through an auxiliary Φ with Φ∘ψ = id
        let needs_aux = src_c.iter().any(|c| {
            matches!(c, ConstraintKind::IdealOffset(_) | ConstraintKind::MapsSubgerm { .. } | ConstraintKind::VanishInto(_))
        });
        if needs_aux {
            let inv = Automorphism::new(&x, sv)?.inverse()?.free_images();
            let supports = vec![monomials(x.nvars(), 1, dd, |_| true); inv.len()];
            let aux = b.block("Phi", x.vars(), free_labels("Phi", &x), inv, supports, Some(x.free_indices()));
            gb.phi_aux = Some(aux);
            for (k, i) in x.free_indices().into_iter().enumerate() {
                let e = sub(subst(unknown(aux, k), ims.clone()), konst(x.var(i)));
                b.equation(format!("inverse.Phi[{k}]"), e, ring_ideal(&x), dd);
            }
            let aux_ims = b.automorphism_images(aux, &x, &|i| konst(x.var(i)));
            compile_offsets(&mut b, &x, aux, &aux_ims, &src_c)?;
        }
        psi_images = Some(ims);
    }

    if matching {
        let bound = req.degree - 1;
        let jx = ring_ideal(&x);
        // f∘ψ (or f) as expressions in the source ring
        let f_images: Vec<E> = f
            .images()
            .into_iter()
            .map(|c| match &psi_images {
                Some(ims) => subst(konst(c), ims.clone()),
                None => konst(c),
            })
            .collect();
        let y_free = y.free_indices();
        for (k, ftk) in ft.components().iter().enumerate() {
            let acted: E = match tag {
                GroupTag::R => f_images[y_free[k]].clone(),
                GroupTag::L | GroupTag::LR => {
                    let blk = gb.phi_y.expect("target block");
                    subst(unknown(blk, k), f_images.clone())
                }
                GroupTag::C | GroupTag::K => {
                    let (p, mx, my) = gb.product.as_ref().expect("product ring");
                    let blk = gb.c.expect("contact block");
                    // C(x, f(ψ(x))): the x-slot carries x itself
                    let mut ims: Vec<Option<E>> = vec![None; p.nvars()];
                    for (i, &pi) in mx.iter().enumerate() {
                        ims[pi] = Some(konst(x.var(i)));
                    }
                    for &j in &y_free {
                        ims[my[j]] = Some(f_images[j].clone());
                    }
                    subst(unknown(blk, k), ims.into_iter().map(|o| o.expect("covered")).collect())
                }
            };
            b.equation(format!("match[{k}]"), sub(konst(ftk.clone()), acted), jx.clone(), bound);
        }
    }
    Ok((b.finish(), gb))
}

/// Offsets, subgerm and vanishing constraints on an automorphism-type
/// unknown with images `ims` over `ring`.
pub(crate) fn compile_offsets(b: &mut Builder, ring: &Ring, blk: usize, ims: &[E], cs: &[&ConstraintKind]) -> Result<()> {
    let dd = ring.trunc();
    for c in cs {
        match c {
            ConstraintKind::IdealOffset(gens) => {
                let ideal = ideal_with(ring, gens);
                for (k, i) in ring.free_indices().into_iter().enumerate() {
                    let e = sub(unknown(blk, k), konst(ring.var(i)));
                    b.equation(format!("{}.offset[{k}]", b.blocks[blk].name), e, ideal.clone(), dd);
                }
            }
            ConstraintKind::MapsSubgerm { from, into } => {
                let ideal = ideal_with(ring, into);
                for (k, q) in from.iter().enumerate() {
                    let e = subst(konst(q.clone()), ims.to_vec());
                    b.equation(format!("{}.subgerm[{k}]", b.blocks[blk].name), e, ideal.clone(), dd);
                }
            }
            ConstraintKind::VanishInto(gens) => {
                let ideal = ideal_with(ring, gens);
                for k in 0..ring.free_indices().len() {
                    b.equation(format!("{}.vanish[{k}]", b.blocks[blk].name), unknown(blk, k), ideal.clone(), dd);
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// Assembles the group element from solved unknowns.
pub(crate) fn witness_from(req: &SolveRequest, gb: &GroupBlocks, values: &[Vec<Jet>]) -> Result<GroupElement> {
    let x = req.f.source();
    let y = req.f.target();
    let phi_x = || -> Result<Automorphism> {
        Automorphism::new(x, values[gb.psi.expect("source block")].clone())?.inverse()
    };
    let contact = || -> Result<ContactElem> {
        let (p, mx, my) = gb.product.clone().expect("product ring");
        ContactElem::with_product(x, y, &p, mx, my, values[gb.c.expect("contact block")].clone())
    };
    Ok(match req.group {
        GroupTag::R => GroupElement::R(phi_x()?),
        GroupTag::L => GroupElement::L(Automorphism::new(y, values[gb.phi_y.expect("target block")].clone())?),
        GroupTag::LR => GroupElement::LR(LRElem {
            phi_x: phi_x()?,
            phi_y: Automorphism::new(y, values[gb.phi_y.expect("target block")].clone())?,
        }),
        GroupTag::C => GroupElement::C(contact()?),
        GroupTag::K => GroupElement::K(KElem { phi: phi_x()?, c: contact()? }),
    })
}

fn check_request(req: &SolveRequest) -> Result<()> {
    let f = &req.f;
    let ft = &req.f_tilde;
    if f.source() != ft.source() || f.target() != ft.target() {
        return Err(Error::structural("the two maps have different rings"));
    }
    let d = f.source().trunc();
    if req.degree < 2 || req.degree > d + 1 {
        return Err(Error::Domain(format!("degree {} outside 2..={}", req.degree, d + 1)));
    }
    for (name, m) in [("lhs", ft), ("rhs", f)] {
        let rep = m.validate();
        if !rep.valid {
            return Err(Error::InvalidMap(format!("{name}: {}", rep.violations.join("; "))));
        }
    }
    Ok(())
}

/// Post-checks filtered-level constraints with the general membership test.
fn filtered_ok(req: &SolveRequest, g: &GroupElement) -> Result<bool> {
    let x = req.f.source();
    for c in &req.constraints {
        if let ConstraintKind::FilteredLevel { level, ideal } = &c.kind {
            let gens = ideal.clone().unwrap_or_else(|| x.free_indices().into_iter().map(|i| x.var(i)).collect());
            let ii = IdealJet::new(x.vars(), x.field(), x.trunc(), gens)?;
            let (tag, elem) = match (&c.scope, g) {
                (Scope::Source, GroupElement::LR(e)) => (GroupTag::R, GroupElement::R(e.phi_x.clone())),
                (Scope::Source, GroupElement::K(k)) => (GroupTag::R, GroupElement::R(k.phi.clone())),
                (Scope::Target, GroupElement::LR(e)) => (GroupTag::L, GroupElement::L(e.phi_y.clone())),
                (Scope::Target, GroupElement::K(k)) => (GroupTag::C, GroupElement::C(k.c.clone())),
                (_, g) => (g.tag().expect("group element"), g.clone()),
            };
            let spec = FilteredSubgroupSpec { tag, level: *level, ideal: ii };
            if !filtered_member(&elem, &spec)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Re-checks the witness against the compiled constraints verbatim.
pub fn constraints_hold(req: &SolveRequest, g: &GroupElement) -> Result<bool> {
    if !filtered_ok(req, g)? {
        return Ok(false);
    }
    for c in &req.constraints {
        let phi = match (&c.scope, g) {
            (Scope::Source, g) => g.source_automorphism().cloned(),
            (Scope::Target, GroupElement::L(p)) => Some(p.clone()),
            (Scope::Target, GroupElement::LR(e)) => Some(e.phi_y.clone()),
            _ => None,
        };
        let Some(phi) = phi else { continue };
        let ring = phi.ring().clone();
        let ok = match &c.kind {
            ConstraintKind::Identity => phi.is_identity(),
            ConstraintKind::IdealOffset(gens) => {
                let ideal = ideal_with(&ring, gens);
                let mut ok = true;
                for (k, i) in ring.free_indices().into_iter().enumerate() {
                    ok &= ideal.is_member(&(&phi.free_images()[k] - &ring.var(i)))?;
                }
                ok
            }
            ConstraintKind::MapsSubgerm { from, into } => {
                let ideal = ideal_with(&ring, into);
                let mut ok = true;
                for q in from {
                    ok &= ideal.is_member(&phi.pull_back(q))?;
                }
                ok
            }
            ConstraintKind::VanishInto(gens) => {
                let ideal = ideal_with(&ring, gens);
                let mut ok = true;
                for im in phi.free_images() {
                    ok &= ideal.is_member(&im)?;
                }
                ok
            }
            _ => true,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Searches `g` with `f̃ ≡ g·f mod J_X + m^d` order by order.
pub fn solve_equivalence(req: &SolveRequest) -> Result<SolveReport> {
    check_request(req)?;
    let (system, gb) = compile(req, true)?;
    let newton = engine::solve_newton(&system);
    let mut outcome = newton.clone();
    if let Status::Obstructed { .. } = newton.status {
        if let Field::Prime(_) = system.field {
            match engine::search(&system, SearchLimits::default()) {
                SearchResult::Found(o) => outcome = o,
                SearchResult::Exhausted { deepest, residual } => {
                    return Ok(report(req, newton.log, Method::Search, SolveOutcome::Obstructed {
                        order: deepest + 1,
                        residual,
                        branch: Branch::Exhaustive,
                    }));
                }
                SearchResult::Abandoned => {}
            }
        }
    }
    match outcome.status {
        Status::Solved => {
            let witness = witness_from(req, &gb, &outcome.values)?;
            if !filtered_ok(req, &witness)? {
                return Ok(report(req, outcome.log, outcome.method, SolveOutcome::Obstructed {
                    order: req.degree - 1,
                    residual: Vec::new(),
                    branch: Branch::Filtered,
                }));
            }
            let acted = witness.apply_unchecked(&req.f)?;
            let verified = acted.equal_mod(&req.f_tilde, req.degree)?;
            let unknowns = system
                .blocks
                .iter()
                .zip(&outcome.values)
                .map(|(b, v)| (b.name.clone(), v.clone()))
                .collect();
            Ok(report(req, outcome.log, outcome.method, SolveOutcome::Success { witness, unknowns, verified }))
        }
        Status::Obstructed { order, residual } => {
            let lead = map_order(&req.f, req.degree);
            let other = map_order(&req.f_tilde, req.degree);
            let all_pinned = system
                .blocks
                .iter()
                .enumerate()
                .all(|(i, b)| b.linear.is_none() || gb.pinned.contains(&i));
            let out = if lead != other {
                SolveOutcome::Obstructed { order, residual, branch: Branch::Invariant }
            } else if all_pinned {
                SolveOutcome::Obstructed { order, residual, branch: Branch::Pinned }
            } else if order <= lead.max(1) {
                SolveOutcome::SeedRequired { order, residual }
            } else {
                SolveOutcome::Obstructed { order, residual, branch: Branch::Seed }
            };
            Ok(report(req, outcome.log, outcome.method, out))
        }
    }
}

fn report(req: &SolveRequest, log: Vec<StageLog>, method: Method, outcome: SolveOutcome) -> SolveReport {
    SolveReport { group: req.group, degree: req.degree, outcome, log, method }
}

/// One probe of [`probe_orbit_closure`].
#[derive(Clone, Debug)]
pub struct ProbeEntry {
    pub degree: u32,
    pub report: SolveReport,
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub entries: Vec<ProbeEntry>,
    /// Largest scheduled degree reached with success.
    pub max_achieved: Option<u32>,
    /// First obstruction order met along the schedule.
    pub first_obstruction: Option<u32>,
}

/// Runs the solver along a schedule of degrees.
pub fn probe_orbit_closure(
    group: GroupTag,
    f: &GermMap,
    f_tilde: &GermMap,
    schedule: &[u32],
    seed: Option<&GroupElement>,
) -> Result<ProbeReport> {
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("degree schedule must be strictly increasing".into()));
    }
    let mut entries = Vec::new();
    let mut max_achieved = None;
    let mut first_obstruction = None;
    for &d in schedule {
        let mut req = SolveRequest::new(group, f, f_tilde, d);
        req.seed = seed.cloned();
        let report = solve_equivalence(&req)?;
        if report.is_success() {
            max_achieved = Some(d);
        } else if first_obstruction.is_none() {
            first_obstruction = report.obstruction_order();
        }
        entries.push(ProbeEntry { degree: d, report });
    }
    Ok(ProbeReport { entries, max_achieved, first_obstruction })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rings(d: u32) -> (Ring, Ring) {
        let q = Field::Rational;
        (
            LocalRingPresentation::parse(&["x"], &[], q, d, &[]).unwrap(),
            LocalRingPresentation::parse(&["y"], &[], q, d, &[]).unwrap(),
        )
    }

    #[test]
    fn right_square_root_witness() {
        let (x, y) = rings(5);
        let f = GermMap::parse(&x, &y, &["x^2"]).unwrap();
        let ft = GermMap::parse(&x, &y, &["x^2 + x^3"]).unwrap();
        let rep = solve_equivalence(&SolveRequest::new(GroupTag::R, &f, &ft, 5)).unwrap();
        let SolveOutcome::Success { unknowns, verified, .. } = &rep.outcome else { panic!("{rep:?}") };
        assert!(verified);
        assert_eq!(unknowns[0].1[0], x.parse_jet("x + 1/2 x^2 - 1/8 x^3").unwrap());
    }

    #[test]
    fn order_mismatch_is_an_invariant_obstruction() {
        let (x, y) = rings(4);
        let f = GermMap::parse(&x, &y, &["x^2"]).unwrap();
        let ft = GermMap::parse(&x, &y, &["x^3"]).unwrap();
        for tag in [GroupTag::R, GroupTag::K] {
            let rep = solve_equivalence(&SolveRequest::new(tag, &f, &ft, 3)).unwrap();
            match rep.outcome {
                SolveOutcome::Obstructed { order, branch, .. } => {
                    assert_eq!(order, 2);
                    assert_eq!(branch, Branch::Invariant);
                }
                o => panic!("{o:?}"),
            }
        }
    }

    #[test]
    fn contact_witness_is_a_unit_multiple() {
        let (x, y) = rings(5);
        let f = GermMap::parse(&x, &y, &["x^2"]).unwrap();
        let ft = GermMap::parse(&x, &y, &["x^2 + x^4"]).unwrap();
        let rep = solve_equivalence(&SolveRequest::new(GroupTag::K, &f, &ft, 5)).unwrap();
        let Some(GroupElement::K(k)) = rep.witness() else { panic!("{rep:?}") };
        assert!(k.phi.is_identity());
        let lin = crate::groups::linearize_contact(&k.c, &k.phi, &f).unwrap();
        assert_eq!(lin.u[0][0].retrunc(2), x.parse_jet("1 + x^2").unwrap().retrunc(2));
    }

    #[test]
    fn left_right_with_identity_constraints() {
        let (x, y) = rings(4);
        let f = GermMap::parse(&x, &y, &["x^2"]).unwrap();
        let same = GermMap::parse(&x, &y, &["x^2 + x^5"]).unwrap();
        let other = GermMap::parse(&x, &y, &["x^2 + x^3"]).unwrap();
        let pin = |r: SolveRequest| {
            r.constraint(Constraint::new(Scope::Source, ConstraintKind::Identity))
                .constraint(Constraint::new(Scope::Target, ConstraintKind::Identity))
        };
        assert!(solve_equivalence(&pin(SolveRequest::new(GroupTag::LR, &f, &same, 4))).unwrap().is_success());
        let rep = solve_equivalence(&pin(SolveRequest::new(GroupTag::LR, &f, &other, 4))).unwrap();
        assert!(matches!(rep.outcome, SolveOutcome::Obstructed { branch: Branch::Pinned, .. }));
    }

    #[test]
    fn rational_leading_order_needs_a_seed() {
        let (x, y) = rings(4);
        let f = GermMap::parse(&x, &y, &["x^2"]).unwrap();
        let ft = GermMap::parse(&x, &y, &["4x^2"]).unwrap();
        let rep = solve_equivalence(&SolveRequest::new(GroupTag::R, &f, &ft, 4)).unwrap();
        assert!(matches!(rep.outcome, SolveOutcome::SeedRequired { order: 2, .. }));
        let seed = GroupElement::R(Automorphism::parse(&x, &["x/2"]).unwrap());
        let rep = solve_equivalence(&SolveRequest::new(GroupTag::R, &f, &ft, 4).seed(seed)).unwrap();
        assert!(rep.is_success());
    }

    #[test]
    fn ideal_offset_is_respected() {
        let (x, y) = rings(5);
        let f = GermMap::parse(&x, &y, &["x^2"]).unwrap();
        let ft = GermMap::parse(&x, &y, &["x^2 + x^4"]).unwrap();
        let a = vec![x.parse_jet("x^3").unwrap()];
        let req = SolveRequest::new(GroupTag::R, &f, &ft, 5)
            .constraint(Constraint::new(Scope::Source, ConstraintKind::IdealOffset(a)));
        let rep = solve_equivalence(&req).unwrap();
        let g = rep.witness().expect("solvable with offset in (x^3)").clone();
        assert!(constraints_hold(&req, &g).unwrap());
    }
}
