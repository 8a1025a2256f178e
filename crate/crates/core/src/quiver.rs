//! Rooted-tree quivers of germ maps: validation, grading, joint solving of
//! the morphism system `Φ_w∘f̃_wv = f_wv∘Φ_v`, purification of nested
//! solutions, base change, and normal forms of unfoldings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::build::{free_labels, monomials, ring_ideal, Builder};
use crate::engine::{self, Method, SearchLimits, SearchResult, StageLog, Status, System};
use crate::error::{Error, Result};
use crate::expr::{add, konst, mul, sub, subst, unknown, E};
use crate::field::Field;
use crate::germs::{GermMap, LocalRingPresentation, Ring};
use crate::groups::{Automorphism, GroupElement, GroupTag, LRElem};
use crate::ideal::IdealJet;
use crate::jet::Jet;
use crate::solver::{compile_offsets, map_order, shape_for, Branch, ConstraintKind};
use crate::vars::{BlockKind, VariableSet};

/// An edge `from -> to` carrying `f: X_from -> X_to`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuiverEdge {
    pub from: String,
    pub to: String,
    pub map: GermMap,
}

impl QuiverEdge {
    pub fn label(&self) -> String {
        format!("{}->{}", self.from, self.to)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuiverSpec {
    pub vertices: Vec<(String, Ring)>,
    pub edges: Vec<QuiverEdge>,
    /// Constraints on the morphism at a vertex.
    pub constraints: Vec<(String, ConstraintKind)>,
}

impl QuiverSpec {
    pub fn new() -> QuiverSpec {
        QuiverSpec::default()
    }

    pub fn vertex(mut self, id: &str, ring: &Ring) -> QuiverSpec {
        self.vertices.push((id.to_string(), ring.clone()));
        self
    }

    pub fn edge(mut self, from: &str, to: &str, map: GermMap) -> QuiverSpec {
        self.edges.push(QuiverEdge { from: from.to_string(), to: to.to_string(), map });
        self
    }

    pub fn constraint(mut self, vertex: &str, kind: ConstraintKind) -> QuiverSpec {
        self.constraints.push((vertex.to_string(), kind));
        self
    }

    pub fn ring(&self, id: &str) -> Option<&Ring> {
        self.vertices.iter().find(|(v, _)| v == id).map(|(_, r)| r)
    }

    pub fn edge_between(&self, from: &str, to: &str) -> Option<&QuiverEdge> {
        self.edges.iter().find(|e| e.from == from && e.to == to)
    }

    fn ring_of(&self, id: &str) -> Result<&Ring> {
        self.ring(id).ok_or_else(|| Error::Domain(format!("unknown vertex {id}")))
    }
}

/// Why a quiver is not a rooted tree of valid maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuiverDefect {
    TooFewVertices(usize),
    DuplicateVertex(String),
    UnknownVertex(String),
    Loop(String),
    Branching(String),
    Cycle(Vec<String>),
    /// More than one vertex without an outgoing edge.
    Disconnected(Vec<String>),
    RingMismatch(String),
    InvalidMap(String, String),
}

impl QuiverDefect {
    pub fn kind(&self) -> &'static str {
        match self {
            QuiverDefect::TooFewVertices(_) => "too-few-vertices",
            QuiverDefect::DuplicateVertex(_) => "duplicate-vertex",
            QuiverDefect::UnknownVertex(_) => "unknown-vertex",
            QuiverDefect::Loop(_) => "loop",
            QuiverDefect::Branching(_) => "branching",
            QuiverDefect::Cycle(_) => "cycle",
            QuiverDefect::Disconnected(_) => "disconnected",
            QuiverDefect::RingMismatch(_) => "ring-mismatch",
            QuiverDefect::InvalidMap(..) => "invalid-map",
        }
    }
}

impl fmt::Display for QuiverDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuiverDefect::TooFewVertices(n) => write!(f, "too-few-vertices: {n} vertex, at least two needed"),
            QuiverDefect::DuplicateVertex(v) => write!(f, "duplicate-vertex: {v}"),
            QuiverDefect::UnknownVertex(v) => write!(f, "unknown-vertex: {v}"),
            QuiverDefect::Loop(v) => write!(f, "loop: edge {v}->{v} gives a conjugation problem"),
            QuiverDefect::Branching(v) => write!(f, "branching: {v} has several outgoing edges"),
            QuiverDefect::Cycle(vs) => write!(f, "cycle: through {}", vs.join(", ")),
            QuiverDefect::Disconnected(roots) => write!(f, "disconnected: several roots {}", roots.join(", ")),
            QuiverDefect::RingMismatch(e) => write!(f, "ring-mismatch: map on edge {e} has other rings"),
            QuiverDefect::InvalidMap(e, why) => write!(f, "invalid-map: edge {e}: {why}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuiverValidity {
    pub valid: bool,
    pub defects: Vec<QuiverDefect>,
}

/// Accepts rooted directed trees with at least two vertices and valid
/// edge maps.
pub fn validate_quiver(q: &QuiverSpec) -> QuiverValidity {
    let mut defects = Vec::new();
    let mut ids: Vec<&str> = Vec::new();
    for (v, _) in &q.vertices {
        if ids.contains(&v.as_str()) {
            defects.push(QuiverDefect::DuplicateVertex(v.clone()));
        } else {
            ids.push(v);
        }
    }
    let mut out: BTreeMap<&str, Vec<&str>> = ids.iter().map(|v| (*v, Vec::new())).collect();
    for e in &q.edges {
        let mut known = true;
        for end in [&e.from, &e.to] {
            if !ids.contains(&end.as_str()) {
                known = false;
                let d = QuiverDefect::UnknownVertex(end.clone());
                if !defects.contains(&d) {
                    defects.push(d);
                }
            }
        }
        if !known {
            continue;
        }
        if e.from == e.to {
            defects.push(QuiverDefect::Loop(e.from.clone()));
        } else {
            out.get_mut(e.from.as_str()).expect("known vertex").push(&e.to);
        }
        let (src, tgt) = (q.ring(&e.from).expect("known"), q.ring(&e.to).expect("known"));
        if e.map.source() != src || e.map.target() != tgt {
            defects.push(QuiverDefect::RingMismatch(e.label()));
        } else {
            let rep = e.map.validate();
            if !rep.valid {
                defects.push(QuiverDefect::InvalidMap(e.label(), rep.violations.join("; ")));
            }
        }
    }
    for (v, ws) in &out {
        if ws.len() > 1 {
            defects.push(QuiverDefect::Branching(v.to_string()));
        }
    }
    let mut cycles: Vec<Vec<String>> = Vec::new();
    for v in &ids {
        let mut path: Vec<&str> = vec![v];
        let mut cur = *v;
        while let Some(next) = out[cur].first() {
            if let Some(pos) = path.iter().position(|u| u == next) {
                let mut cyc: Vec<String> = path[pos..].iter().map(|s| s.to_string()).collect();
                cyc.sort();
                if !cycles.contains(&cyc) {
                    cycles.push(cyc);
                }
                break;
            }
            path.push(next);
            cur = next;
        }
    }
    defects.extend(cycles.into_iter().map(QuiverDefect::Cycle));
    let roots: Vec<String> = out.iter().filter(|(_, ws)| ws.is_empty()).map(|(v, _)| v.to_string()).collect();
    if roots.len() > 1 {
        defects.push(QuiverDefect::Disconnected(roots));
    }
    if ids.len() < 2 {
        defects.push(QuiverDefect::TooFewVertices(ids.len()));
    }
    QuiverValidity { valid: defects.is_empty(), defects }
}

/// Grades (path lengths to the root) and the nest chain `Γ_≤0 ⊂ Γ_≤1 ⊂ …`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexGrade {
    pub root: String,
    pub grades: BTreeMap<String, u32>,
    pub parent: BTreeMap<String, String>,
    /// Vertices of grade exactly `j`, sorted by id.
    pub levels: Vec<Vec<String>>,
}

impl VertexGrade {
    pub fn grade(&self, v: &str) -> Option<u32> {
        self.grades.get(v).copied()
    }

    pub fn max_grade(&self) -> u32 {
        self.levels.len() as u32 - 1
    }

    /// All vertices by grade, ties by id.
    pub fn order(&self) -> Vec<String> {
        self.levels.iter().flatten().cloned().collect()
    }

    /// `Γ_≤j`.
    pub fn nest(&self, j: u32) -> Vec<String> {
        self.levels.iter().take(j as usize + 1).flatten().cloned().collect()
    }

    /// The nest chain `Γ_≤0 ⊂ Γ_≤1 ⊂ …`.
    pub fn chain(&self) -> Vec<Vec<String>> {
        (0..=self.max_grade()).map(|j| self.nest(j)).collect()
    }

    pub fn children(&self, v: &str) -> Vec<String> {
        self.order().into_iter().filter(|u| self.parent.get(u).map(|p| p == v).unwrap_or(false)).collect()
    }

    /// Strict descendants in grade order.
    pub fn descendants(&self, v: &str) -> Vec<String> {
        self.order().into_iter().filter(|u| u != v && self.path_to_root(u).iter().any(|a| a == v)).collect()
    }

    /// `v, parent(v), …, root`.
    pub fn path_to_root(&self, v: &str) -> Vec<String> {
        let mut out = vec![v.to_string()];
        let mut cur = v;
        while let Some(p) = self.parent.get(cur) {
            out.push(p.clone());
            cur = p;
        }
        out
    }
}

pub fn grade_vertices(q: &QuiverSpec) -> Result<VertexGrade> {
    let val = validate_quiver(q);
    if !val.valid {
        let why: Vec<String> = val.defects.iter().map(|d| d.to_string()).collect();
        return Err(Error::structural(format!("invalid quiver: {}", why.join("; "))));
    }
    let parent: BTreeMap<String, String> = q.edges.iter().map(|e| (e.from.clone(), e.to.clone())).collect();
    let root = q.vertices.iter().map(|(v, _)| v).find(|v| !parent.contains_key(*v)).expect("valid tree").clone();
    let mut grades = BTreeMap::new();
    for (v, _) in &q.vertices {
        let mut g = 0;
        let mut cur = v;
        while let Some(p) = parent.get(cur) {
            g += 1;
            cur = p;
        }
        grades.insert(v.clone(), g);
    }
    let top = *grades.values().max().expect("nonempty");
    let levels = (0..=top).map(|j| grades.iter().filter(|(_, g)| **g == j).map(|(v, _)| v.clone()).collect()).collect();
    Ok(VertexGrade { root, grades, parent, levels })
}

/// Seek `Φ_v: X̃_v -> X_v` with `Φ_w∘f̃_wv = f_wv∘Φ_v` for every edge.
#[derive(Clone, Debug)]
pub struct QuiverMorphismProblem {
    /// The quiver `(Γ, X̃, f̃)`.
    pub domain: QuiverSpec,
    /// The quiver `(Γ, X, f)`.
    pub codomain: QuiverSpec,
    /// Starting components of `Φ_v`, over `X̃_v`.
    pub seeds: Vec<(String, Vec<Jet>)>,
    /// Constraints on the base substitution (only `Identity` is supported).
    pub base_constraints: Vec<ConstraintKind>,
}

impl QuiverMorphismProblem {
    pub fn new(domain: QuiverSpec, codomain: QuiverSpec) -> Result<QuiverMorphismProblem> {
        let gd = grade_vertices(&domain)?;
        let gc = grade_vertices(&codomain)?;
        if gd.parent != gc.parent || gd.grades != gc.grades {
            return Err(Error::structural("the two quivers live on different graphs"));
        }
        let (_, r0) = &codomain.vertices[0];
        for (_, r) in domain.vertices.iter().chain(&codomain.vertices) {
            crate::germs::check_compatible(r0, r)?;
        }
        Ok(QuiverMorphismProblem { domain, codomain, seeds: Vec::new(), base_constraints: Vec::new() })
    }

    pub fn seed(mut self, vertex: &str, components: Vec<Jet>) -> QuiverMorphismProblem {
        self.seeds.push((vertex.to_string(), components));
        self
    }

    /// Constraints declared on either quiver for vertex `v`.
    pub fn constraints_for(&self, v: &str) -> Vec<&ConstraintKind> {
        let mut out: Vec<&ConstraintKind> = Vec::new();
        for (u, c) in self.codomain.constraints.iter().chain(&self.domain.constraints) {
            if u == v && !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    pub fn grades(&self) -> Result<VertexGrade> {
        grade_vertices(&self.codomain)
    }

    fn check_vertices(&self) -> Result<()> {
        for (u, _) in self.codomain.constraints.iter().chain(&self.domain.constraints) {
            self.codomain.ring_of(u)?;
        }
        for (u, _) in &self.seeds {
            self.codomain.ring_of(u)?;
        }
        Ok(())
    }
}

/// The morphism `Φ_v: X̃_v -> X_v`: images of every variable of `X_v`,
/// parameters included, as jets over `X̃_v`.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexMorphism {
    pub vertex: String,
    pub domain: Ring,
    pub codomain: Ring,
    pub images: Vec<Jet>,
}

impl VertexMorphism {
    pub fn free_images(&self) -> Vec<Jet> {
        self.codomain.free_indices().into_iter().map(|i| self.images[i].clone()).collect()
    }

    /// As a germ map, when parameters map to their namesakes.
    pub fn germ_map(&self) -> Result<GermMap> {
        let g = GermMap::new(&self.domain, &self.codomain, self.free_images())?;
        if g.images() != self.images {
            return Err(Error::Domain(format!("the morphism at {} moves the parameters", self.vertex)));
        }
        Ok(g)
    }
}

#[derive(Clone, Debug)]
pub enum QuiverOutcome {
    Success {
        morphisms: Vec<VertexMorphism>,
        /// Images `Φ_𝕜(t̃)` of the base parameters, for base-change solves.
        base: Option<Vec<Jet>>,
        /// The rectangles re-checked with plain jet arithmetic.
        verified: bool,
    },
    Obstructed { order: u32, residual: Vec<(String, Jet)>, edges: Vec<String>, branch: Branch },
    SeedRequired { order: u32, residual: Vec<(String, Jet)>, edges: Vec<String> },
}

#[derive(Clone, Debug)]
pub struct QuiverReport {
    pub degree: u32,
    pub outcome: QuiverOutcome,
    pub log: Vec<StageLog>,
    pub method: Method,
}

impl QuiverReport {
    pub fn is_success(&self) -> bool {
        matches!(self.outcome, QuiverOutcome::Success { .. })
    }

    pub fn morphism(&self, v: &str) -> Option<&VertexMorphism> {
        match &self.outcome {
            QuiverOutcome::Success { morphisms, .. } => morphisms.iter().find(|m| m.vertex == v),
            _ => None,
        }
    }
}

fn parameter_names(r: &Ring) -> Vec<String> {
    r.parameter_indices().into_iter().map(|i| r.vars().name(i).to_string()).collect()
}

/// Identity-like start: by variable name, else by position, else zero.
fn identity_start(x: &Ring, xt: &Ring) -> Vec<Jet> {
    let xf = x.free_indices();
    let xtf = xt.free_indices();
    xf.iter()
        .enumerate()
        .map(|(k, &i)| match xt.vars().index_of(x.vars().name(i)) {
            Some(j) if !xt.vars().is_parameter(j) => xt.var(j),
            _ if xf.len() == xtf.len() => xt.var(xtf[k]),
            _ => xt.zero(),
        })
        .collect()
}

struct BaseBlock {
    block: usize,
    /// Free variables `t̃` of the base block, named as the domain parameters.
    vars: std::sync::Arc<VariableSet>,
    /// Codomain parameter names, one per component.
    names: Vec<String>,
}

struct Compiled {
    system: System,
    blocks: BTreeMap<String, usize>,
    base: Option<BaseBlock>,
    pinned: Vec<usize>,
}

fn compile_quiver(p: &QuiverMorphismProblem, d: u32, base_change: bool) -> Result<Compiled> {
    p.check_vertices()?;
    let g = p.grades()?;
    let r0 = p.codomain.ring_of(&g.root)?.clone();
    let field = r0.field();
    let dd = r0.trunc();
    if d < 2 || d > dd + 1 {
        return Err(Error::Domain(format!("degree {d} outside 2..={}", dd + 1)));
    }
    let mut b = Builder::new(field);
    let mut pinned = Vec::new();

    let base = if base_change {
        let tn = parameter_names(&r0);
        let tt = parameter_names(p.domain.ring_of(&g.root)?);
        for v in g.order() {
            if parameter_names(p.codomain.ring_of(&v)?) != tn || parameter_names(p.domain.ring_of(&v)?) != tt {
                return Err(Error::Domain(format!("vertex {v} does not share the t-block")));
            }
        }
        for c in &p.base_constraints {
            if *c != ConstraintKind::Identity {
                return Err(Error::Unsupported(format!("base constraint {c}")));
            }
        }
        if tn.is_empty() {
            None
        } else {
            let vars = VariableSet::new(vec![("t".into(), BlockKind::Free, tt.clone())])?;
            let tring = LocalRingPresentation::smooth(&vars, field, dd)?;
            let values: Vec<Jet> = tn
                .iter()
                .enumerate()
                .map(|(k, n)| match tt.iter().position(|m| m == n) {
                    Some(j) => tring.var(j),
                    None if tt.len() == tn.len() => tring.var(k),
                    None => tring.zero(),
                })
                .collect();
            let fixed = p.base_constraints.contains(&ConstraintKind::Identity);
            let support = if fixed { Vec::new() } else { monomials(tt.len(), 1, dd, |_| true) };
            let labels = tn.iter().map(|n| format!("Phi[base].{n}")).collect();
            let block = b.block("Phi[base]", &vars, labels, values, vec![support; tn.len()], None);
            if fixed {
                pinned.push(block);
            }
            Some(BaseBlock { block, vars, names: tn })
        }
    } else {
        None
    };

    let mut blocks = BTreeMap::new();
    let mut images: BTreeMap<String, Vec<E>> = BTreeMap::new();
    for v in g.order() {
        let x = p.codomain.ring_of(&v)?.clone();
        let xt = p.domain.ring_of(&v)?.clone();
        let cs = p.constraints_for(&v);
        let invertible = cs.contains(&&ConstraintKind::Invertible);
        if invertible && x.free_indices().len() != xt.free_indices().len() {
            return Err(Error::Domain(format!("invertible morphism at {v} needs equal dimensions")));
        }
        let same_vars = x.vars() == xt.vars();
        for c in &cs {
            let needs_same = matches!(c, ConstraintKind::Identity | ConstraintKind::IdealOffset(_) | ConstraintKind::FilteredLevel { .. });
            if needs_same && !same_vars {
                return Err(Error::Unsupported(format!("constraint {c} at {v} needs equal variables on both quivers")));
            }
        }
        let ident = identity_start(&x, &xt);
        let start = match p.seeds.iter().find(|(u, _)| *u == v) {
            Some((_, s)) => {
                if s.len() != ident.len() || s.iter().any(|j| j.vars() != xt.vars() || j.trunc() != dd) {
                    return Err(Error::structural(format!("seed at {v} does not fit the domain ring")));
                }
                s.clone()
            }
            None => ident.clone(),
        };
        let sh = shape_for(&x, &xt, xt.free_indices(), start, ident, &|_| true, &cs)?;
        let linear = if invertible { sh.linear } else { None };
        let name = format!("Phi[{v}]");
        let labels = free_labels(&name, &x);
        let blk = b.block(&name, xt.vars(), labels, sh.values, sh.supports, linear);
        if sh.pinned {
            pinned.push(blk);
        }
        let mut k = 0;
        let mut ims = Vec::with_capacity(x.nvars());
        for i in 0..x.nvars() {
            let n = x.vars().name(i);
            if !x.vars().is_parameter(i) {
                ims.push(unknown(blk, k));
                k += 1;
                continue;
            }
            match &base {
                Some(bb) => {
                    let pi = bb.names.iter().position(|m| m == n).expect("shared t-block");
                    let t_ims = (0..bb.vars.len())
                        .map(|j| {
                            let idx = xt.vars().index_of(bb.vars.name(j)).expect("shared t-block");
                            konst(xt.var(idx))
                        })
                        .collect();
                    ims.push(subst(unknown(bb.block, pi), t_ims));
                }
                None => match xt.vars().index_of(n) {
                    Some(j) if xt.vars().is_parameter(j) => ims.push(konst(xt.var(j))),
                    _ => return Err(Error::Domain(format!("parameter {n} of vertex {v} is missing from its domain"))),
                },
            }
        }
        b.preserve_ideal(&format!("valid.{name}"), &x, &ims, &ring_ideal(&xt), dd);
        compile_offsets(&mut b, &xt, blk, &ims, &cs)?;
        for c in &cs {
            if let ConstraintKind::FilteredLevel { level, ideal } = c {
                let gens = ideal.clone().unwrap_or_else(|| xt.free_indices().into_iter().map(|i| xt.var(i)).collect());
                let ii = IdealJet::new(xt.vars(), field, dd, gens.clone())?;
                let test = std::sync::Arc::new(ii.power(level + 1).sum(xt.ideal())?);
                for (k, q) in gens.iter().enumerate() {
                    let e = sub(subst(konst(q.clone()), ims.clone()), konst(q.clone()));
                    b.equation(format!("filtered.{name}[{k}]"), e, test.clone(), dd);
                }
            }
        }
        blocks.insert(v.clone(), blk);
        images.insert(v, ims);
    }

    for v in g.order() {
        let Some(w) = g.parent.get(&v) else { continue };
        let e = p.codomain.edge_between(&v, w).expect("same graph");
        let et = p.domain.edge_between(&v, w).expect("same graph");
        let xt = p.domain.ring_of(&v)?;
        let ft_images: Vec<E> = et.map.images().into_iter().map(konst).collect();
        for (k, fk) in e.map.components().iter().enumerate() {
            let lhs = subst(unknown(blocks[w], k), ft_images.clone());
            let rhs = subst(konst(fk.clone()), images[&v].clone());
            b.equation(format!("edge {v}->{w}[{k}]"), sub(lhs, rhs), ring_ideal(xt), d - 1);
        }
    }
    Ok(Compiled { system: b.finish(), blocks, base, pinned })
}

/// Edges named by residual labels `edge v->w[k]`.
fn residual_edges(residual: &[(String, Jet)]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for (label, _) in residual {
        if let Some(rest) = label.strip_prefix("edge ") {
            let e = rest.split('[').next().unwrap_or(rest).to_string();
            if !out.contains(&e) {
                out.push(e);
            }
        }
    }
    out
}

fn morphisms_from(p: &QuiverMorphismProblem, c: &Compiled, values: &[Vec<Jet>]) -> Result<Vec<VertexMorphism>> {
    let g = p.grades()?;
    let mut out = Vec::new();
    for v in g.order() {
        let x = p.codomain.ring_of(&v)?;
        let xt = p.domain.ring_of(&v)?;
        let comps = &values[c.blocks[&v]];
        let mut k = 0;
        let mut images = Vec::with_capacity(x.nvars());
        for i in 0..x.nvars() {
            if !x.vars().is_parameter(i) {
                images.push(comps[k].clone());
                k += 1;
                continue;
            }
            let n = x.vars().name(i);
            match &c.base {
                Some(bb) => {
                    let pi = bb.names.iter().position(|m| m == n).expect("shared t-block");
                    let map: Vec<usize> =
                        (0..bb.vars.len()).map(|j| xt.vars().index_of(bb.vars.name(j)).expect("shared")).collect();
                    images.push(values[bb.block][pi].embed(xt.vars(), &map, None));
                }
                None => images.push(xt.var(xt.vars().index_of(n).expect("checked at compile time"))),
            }
        }
        out.push(VertexMorphism { vertex: v.clone(), domain: xt.clone(), codomain: x.clone(), images });
    }
    Ok(out)
}

/// Rectangles and validity conditions violated by `morphisms`, checked
/// with plain jet arithmetic modulo `J̃_v + m^d`.
pub fn check_rectangles(p: &QuiverMorphismProblem, morphisms: &[VertexMorphism], d: u32) -> Result<Vec<String>> {
    let find = |v: &str| -> Result<&VertexMorphism> {
        morphisms.iter().find(|m| m.vertex == v).ok_or_else(|| Error::Domain(format!("no morphism at {v}")))
    };
    let mut bad = Vec::new();
    for (v, x) in &p.codomain.vertices {
        let phi = find(v)?;
        let xt = p.domain.ring_of(v)?;
        for q in x.ideal().generators() {
            if !xt.is_member(&q.substitute(&phi.images)?)? {
                bad.push(format!("valid {v}"));
            }
        }
        if phi.free_images().iter().any(|j| !j.in_maximal_ideal()) {
            bad.push(format!("local {v}"));
        }
    }
    for e in &p.codomain.edges {
        let et = p.domain.edge_between(&e.from, &e.to).ok_or_else(|| Error::structural("graphs differ"))?;
        let (phi_v, phi_w) = (find(&e.from)?, find(&e.to)?);
        let xt = p.domain.ring_of(&e.from)?;
        let ft_images = et.map.images();
        for (k, fk) in e.map.components().iter().enumerate() {
            let lhs = phi_w.free_images()[k].substitute(&ft_images)?;
            let rhs = fk.substitute(&phi_v.images)?;
            if !xt.is_member(&(&lhs - &rhs).retrunc(d - 1))? {
                bad.push(format!("edge {}[{k}]", e.label()));
            }
        }
    }
    Ok(bad)
}

fn run(p: &QuiverMorphismProblem, d: u32, base_change: bool) -> Result<QuiverReport> {
    let c = compile_quiver(p, d, base_change)?;
    let newton = engine::solve_newton(&c.system);
    let mut outcome = newton.clone();
    if let (Status::Obstructed { .. }, Field::Prime(_)) = (&newton.status, c.system.field) {
        match engine::search(&c.system, SearchLimits::default()) {
            SearchResult::Found(o) => outcome = o,
            SearchResult::Exhausted { deepest, residual } => {
                let edges = residual_edges(&residual);
                return Ok(QuiverReport {
                    degree: d,
                    outcome: QuiverOutcome::Obstructed { order: deepest + 1, residual, edges, branch: Branch::Exhaustive },
                    log: newton.log,
                    method: Method::Search,
                });
            }
            SearchResult::Abandoned => {}
        }
    }
    let out = match outcome.status {
        Status::Solved => {
            let morphisms = morphisms_from(p, &c, &outcome.values)?;
            let verified = check_rectangles(p, &morphisms, d)?.is_empty();
            let base = c.base.as_ref().map(|bb| outcome.values[bb.block].clone());
            QuiverOutcome::Success { morphisms, base, verified }
        }
        Status::Obstructed { order, residual } => {
            let edges = residual_edges(&residual);
            let all_pinned = (0..c.system.blocks.len()).all(|i| c.pinned.contains(&i));
            if all_pinned {
                QuiverOutcome::Obstructed { order, residual, edges, branch: Branch::Pinned }
            } else if order <= 1 {
                QuiverOutcome::SeedRequired { order, residual, edges }
            } else {
                QuiverOutcome::Obstructed { order, residual, edges, branch: Branch::Seed }
            }
        }
    };
    Ok(QuiverReport { degree: d, outcome: out, log: outcome.log, method: outcome.method })
}

/// Solves the morphism system jointly, order by order, with each `Φ_v`
/// supported on its own vertex variables.
pub fn solve_quiver(p: &QuiverMorphismProblem, d: u32) -> Result<QuiverReport> {
    run(p, d, false)
}

/// As [`solve_quiver`] with an extra base vertex: the shared parameters
/// `t` are substituted by unknown `Φ_𝕜(t̃)` with zero constant terms.
pub fn solve_with_base_change(p: &QuiverMorphismProblem, d: u32) -> Result<QuiverReport> {
    run(p, d, true)
}

/// The ring of all domain vertex variables: one free block per vertex,
/// with variables renamed `v.x`, and the shared parameters. Its ideal is
/// the sum of the `J̃_v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ambient {
    pub ring: Ring,
    /// Index in the ambient ring of each variable of `X̃_v`.
    pub embedding: BTreeMap<String, Vec<usize>>,
}

impl Ambient {
    pub fn new(domain: &QuiverSpec) -> Result<Ambient> {
        let g = grade_vertices(domain)?;
        let root_ring = domain.ring_of(&g.root)?;
        let tn = parameter_names(root_ring);
        let mut blocks = Vec::new();
        for v in g.order() {
            let r = domain.ring_of(&v)?;
            if parameter_names(r) != tn {
                return Err(Error::Domain(format!("vertex {v} does not share the t-block")));
            }
            let names = r.free_indices().into_iter().map(|i| format!("{v}.{}", r.vars().name(i))).collect();
            blocks.push((v.clone(), BlockKind::Free, names));
        }
        if !tn.is_empty() {
            blocks.push(("t".to_string(), BlockKind::Parameter, tn.clone()));
        }
        let vars = VariableSet::new(blocks)?;
        let mut embedding = BTreeMap::new();
        let mut gens = Vec::new();
        for v in g.order() {
            let r = domain.ring_of(&v)?;
            let map: Vec<usize> = (0..r.nvars())
                .map(|i| {
                    let n = r.vars().name(i);
                    let amb = if r.vars().is_parameter(i) { n.to_string() } else { format!("{v}.{n}") };
                    vars.index_of(&amb).expect("named above")
                })
                .collect();
            gens.extend(r.ideal().generators().iter().map(|q| q.embed(&vars, &map, None)));
            embedding.insert(v, map);
        }
        let ring = LocalRingPresentation::new(&vars, root_ring.field(), root_ring.trunc(), gens)?;
        Ok(Ambient { ring, embedding })
    }

    /// A jet over `X̃_v` moved into the ambient ring.
    pub fn embed(&self, v: &str, j: &Jet) -> Jet {
        j.embed(self.ring.vars(), &self.embedding[v], None)
    }

    /// `x̃_w - f̃_wv(x̃_v)` for the edge `v -> w` of the domain quiver.
    pub fn binomials(&self, domain: &QuiverSpec, v: &str, w: &str) -> Result<Vec<Jet>> {
        let e = domain.edge_between(v, w).ok_or_else(|| Error::Domain(format!("no edge {v}->{w}")))?;
        let rw = domain.ring_of(w)?;
        Ok(rw
            .free_indices()
            .into_iter()
            .zip(e.map.components())
            .map(|(i, c)| &self.ring.var(self.embedding[w][i]) - &self.embed(v, c))
            .collect())
    }

    /// Binomials of every edge on the path from `v` to the root.
    pub fn path_binomials(&self, domain: &QuiverSpec, v: &str) -> Result<Vec<Jet>> {
        let g = grade_vertices(domain)?;
        let path = g.path_to_root(v);
        let mut out = Vec::new();
        for pair in path.windows(2) {
            out.extend(self.binomials(domain, &pair[0], &pair[1])?);
        }
        Ok(out)
    }

    /// Ambient variable indices of the vertices in `vs`.
    fn indices_of<'a>(&self, vs: impl IntoIterator<Item = &'a String>, domain: &QuiverSpec) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for v in vs {
            let r = domain.ring_of(v)?;
            out.extend(r.free_indices().into_iter().map(|i| self.embedding[v][i]));
        }
        Ok(out)
    }
}

/// A nested solution: `Ψ_v` over the ambient ring, depending only on the
/// variables of vertices of grade at most `grade(v)` and on parameters,
/// with `Ψ_w - f_wv(Ψ_v)` in the ideal of the binomials along the path
/// from `v` to the root plus the quotient ideals, modulo `m^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonPureSolution {
    pub ambient: Ambient,
    pub degree: u32,
    pub psi: BTreeMap<String, Vec<Jet>>,
}

impl NonPureSolution {
    /// Embeds pure morphisms into the ambient ring.
    pub fn from_pure(p: &QuiverMorphismProblem, morphisms: &[VertexMorphism], d: u32) -> Result<NonPureSolution> {
        let ambient = Ambient::new(&p.domain)?;
        let mut psi = BTreeMap::new();
        for m in morphisms {
            let comps = m.free_images().iter().map(|j| ambient.embed(&m.vertex, j)).collect();
            psi.insert(m.vertex.clone(), comps);
        }
        Ok(NonPureSolution { ambient, degree: d, psi })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PurifyStep {
    pub description: String,
    /// Every edge membership holds after the step.
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct PurifyReport {
    pub morphisms: Vec<VertexMorphism>,
    pub steps: Vec<PurifyStep>,
    /// The pure morphisms pass [`check_rectangles`].
    pub verified: bool,
}

struct EdgeChecker<'a> {
    p: &'a QuiverMorphismProblem,
    ambient: &'a Ambient,
    ideals: BTreeMap<String, IdealJet>,
    d: u32,
}

impl<'a> EdgeChecker<'a> {
    fn new(p: &'a QuiverMorphismProblem, ambient: &'a Ambient, d: u32) -> Result<EdgeChecker<'a>> {
        let grades = p.grades()?;
        let mut ideals = BTreeMap::new();
        for v in grades.order() {
            if grades.parent.contains_key(&v) {
                let mut gens = ambient.ring.ideal().generators().to_vec();
                gens.extend(ambient.path_binomials(&p.domain, &v)?);
                let r = &ambient.ring;
                ideals.insert(v, IdealJet::new(r.vars(), r.field(), r.trunc(), gens)?);
            }
        }
        Ok(EdgeChecker { p, ambient, ideals, d })
    }

    /// Edges whose membership fails.
    fn failures(&self, psi: &BTreeMap<String, Vec<Jet>>) -> Result<Vec<String>> {
        let amb = &self.ambient.ring;
        let mut bad = Vec::new();
        for e in &self.p.codomain.edges {
            let x = self.p.codomain.ring_of(&e.from)?;
            let mut k = 0;
            let images: Vec<Jet> = (0..x.nvars())
                .map(|i| {
                    if x.vars().is_parameter(i) {
                        amb.var(amb.vars().index_of(x.vars().name(i)).expect("shared t-block"))
                    } else {
                        k += 1;
                        psi[&e.from][k - 1].clone()
                    }
                })
                .collect();
            for (k, fk) in e.map.components().iter().enumerate() {
                let diff = &psi[&e.to][k] - &fk.substitute_unchecked(&images);
                if !self.ideals[&e.from].is_member(&diff.retrunc(self.d - 1))? {
                    bad.push(format!("{}[{k}]", e.label()));
                }
            }
        }
        Ok(bad)
    }
}

/// Turns a nested solution into a pure one by the grade-by-grade
/// specialization: for each `w` of grade `j` and each descendant `v`,
/// `Ψ_v := Ψ_v|_{x̃_w = f̃_{w⋯v}(x̃_v)}`; then for each `v` of grade `j+1`,
/// the variables of vertices outside the subtree of `v` are set to zero in
/// `Ψ_u` for `u` in that subtree. All edges are re-checked after each step.
pub fn purify(sol: &NonPureSolution, p: &QuiverMorphismProblem) -> Result<PurifyReport> {
    let amb = &sol.ambient;
    if *amb != Ambient::new(&p.domain)? {
        return Err(Error::InvalidElement("solution lives over another ambient ring".into()));
    }
    let g = p.grades()?;
    let d = sol.degree;
    if d < 2 || d > amb.ring.trunc() + 1 {
        return Err(Error::Domain(format!("degree {d} outside 2..={}", amb.ring.trunc() + 1)));
    }
    let mut psi = sol.psi.clone();
    for v in g.order() {
        let m = p.codomain.ring_of(&v)?.free_indices().len();
        let comps = psi.get(&v).ok_or_else(|| Error::InvalidElement(format!("no components at {v}")))?;
        if comps.len() != m || comps.iter().any(|j| j.vars() != amb.ring.vars() || j.trunc() != amb.ring.trunc()) {
            return Err(Error::InvalidElement(format!("components at {v} do not fit the ambient ring")));
        }
        if comps.iter().any(|j| !j.in_maximal_ideal()) {
            return Err(Error::InvalidElement(format!("components at {v} have constant terms")));
        }
        let gv = g.grade(&v).expect("graded");
        let later: Vec<String> = g.order().into_iter().filter(|u| g.grade(u).expect("graded") > gv).collect();
        let forbidden = amb.indices_of(&later, &p.domain)?;
        if comps.iter().any(|j| j.terms().any(|(mono, _)| forbidden.iter().any(|&i| mono.exponent(i) > 0))) {
            return Err(Error::InvalidElement(format!("components at {v} use variables of higher grade")));
        }
    }
    let checker = EdgeChecker::new(p, amb, d)?;
    let bad = checker.failures(&psi)?;
    if !bad.is_empty() {
        return Err(Error::InvalidElement(format!("edge conditions fail: {}", bad.join(", "))));
    }
    let mut steps = Vec::new();
    let mut record = |description: String, psi: &BTreeMap<String, Vec<Jet>>| -> Result<()> {
        let bad = checker.failures(psi)?;
        steps.push(PurifyStep { description: description.clone(), holds: bad.is_empty() });
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Internal(format!("{description} broke edges {}", bad.join(", "))))
        }
    };
    let n = amb.ring.nvars();
    for j in 0..g.max_grade() {
        for w in &g.levels[j as usize] {
            let rw = p.domain.ring_of(w)?;
            for v in g.descendants(w) {
                let path = g.path_to_root(&v);
                let upto = path.iter().position(|u| u == w).expect("descendant");
                let mut comp = p.domain.edge_between(&path[0], &path[1]).expect("edge").map.clone();
                for pair in path[1..=upto].windows(2) {
                    comp = p.domain.edge_between(&pair[0], &pair[1]).expect("edge").map.compose(&comp)?;
                }
                let mut images: Vec<Jet> = (0..n).map(|i| amb.ring.var(i)).collect();
                for (k, i) in rw.free_indices().into_iter().enumerate() {
                    images[amb.embedding[w][i]] = amb.embed(&v, &comp.components()[k]);
                }
                let comps = psi.get_mut(&v).expect("checked");
                for c in comps.iter_mut() {
                    *c = c.substitute_unchecked(&images);
                }
                record(format!("substitute {w} along {v}"), &psi)?;
            }
        }
        for v in &g.levels[j as usize + 1] {
            let mut subtree: BTreeSet<String> = g.descendants(v).into_iter().collect();
            subtree.insert(v.clone());
            let outside: Vec<String> = g.order().into_iter().filter(|u| !subtree.contains(u)).collect();
            let zero = amb.indices_of(&outside, &p.domain)?;
            for u in &subtree {
                let comps = psi.get_mut(u).expect("checked");
                for c in comps.iter_mut() {
                    *c = c.set_zero(&zero);
                }
            }
            record(format!("zero foreign variables below {v}"), &psi)?;
        }
    }
    let mut morphisms = Vec::new();
    for v in g.order() {
        let xt = p.domain.ring_of(&v)?;
        let x = p.codomain.ring_of(&v)?;
        let mut back = vec![usize::MAX; n];
        for (i, &a) in amb.embedding[&v].iter().enumerate() {
            back[a] = i;
        }
        let mut free = Vec::new();
        for c in &psi[&v] {
            if c.terms().any(|(mono, _)| mono.support().any(|(i, _)| back[i] == usize::MAX)) {
                return Err(Error::Internal(format!("component at {v} is not pure after purification")));
            }
            free.push(c.embed(xt.vars(), &back, None));
        }
        let mut it = free.into_iter();
        let images = (0..x.nvars())
            .map(|i| {
                if x.vars().is_parameter(i) {
                    xt.var(xt.vars().index_of(x.vars().name(i)).expect("shared t-block"))
                } else {
                    it.next().expect("one per free variable")
                }
            })
            .collect();
        morphisms.push(VertexMorphism { vertex: v.clone(), domain: xt.clone(), codomain: x.clone(), images });
    }
    let verified = check_rectangles(p, &morphisms, d)?.is_empty();
    Ok(PurifyReport { morphisms, steps, verified })
}

/// Bring `f_t` to `f_o + Σ c_i(t)·v_i` by `g_t` in `ℛ` or `ℒℛ` over the base.
#[derive(Clone, Debug)]
pub struct NormalFormRequest {
    pub group: GroupTag,
    pub family: GermMap,
    /// Each basis vector is one jet over the source per free target
    /// variable.
    pub basis: Vec<Vec<Jet>>,
    pub degree: u32,
}

#[derive(Clone, Debug)]
pub enum NormalFormOutcome {
    Success {
        /// `c_i(t)` over the parameter ring.
        coefficients: Vec<Jet>,
        /// `f_o + Σ c_i(t)·v_i`.
        normal_form: GermMap,
        /// `g_t` with `g_t·normal_form ≡ f_t`.
        witness: GroupElement,
        /// `ψ = Φ_X⁻¹`, so that `f_t = Φ_Y(normal_form∘ψ)`.
        substitution: Vec<Jet>,
        verified: bool,
    },
    Obstructed { order: u32, residual: Vec<(String, Jet)>, branch: Branch },
    SeedRequired { order: u32, residual: Vec<(String, Jet)> },
}

#[derive(Clone, Debug)]
pub struct NormalFormReport {
    pub group: GroupTag,
    pub degree: u32,
    /// The smooth ring of the parameters, over which `c_i` live.
    pub parameter_ring: Ring,
    pub outcome: NormalFormOutcome,
    pub log: Vec<StageLog>,
    pub method: Method,
}

pub fn unfolding_normal_form(req: &NormalFormRequest) -> Result<NormalFormReport> {
    let f = &req.family;
    let x = f.source().clone();
    let y = f.target().clone();
    let field = x.field();
    let dd = x.trunc();
    let d = req.degree;
    if !matches!(req.group, GroupTag::R | GroupTag::LR) {
        return Err(Error::Domain(format!("normal forms are computed for R and LR, not {}", req.group)));
    }
    if !y.is_smooth() {
        return Err(Error::Unsupported("normal forms need a smooth target".into()));
    }
    if !x.vars().has_parameters() {
        return Err(Error::Domain("the family needs a parameter block".into()));
    }
    if d < 2 || d > dd + 1 {
        return Err(Error::Domain(format!("degree {d} outside 2..={}", dd + 1)));
    }
    let rep = f.validate();
    if !rep.valid {
        return Err(Error::InvalidMap(rep.violations.join("; ")));
    }
    let m = y.free_indices().len();
    for v in &req.basis {
        if v.len() != m || v.iter().any(|j| j.vars() != x.vars() || j.trunc() != dd || j.field() != field) {
            return Err(Error::structural("basis vector does not fit the map space"));
        }
    }
    let params = x.parameter_indices();
    let tn = parameter_names(&x);
    let tvars = VariableSet::new(vec![("t".into(), BlockKind::Free, tn.clone())])?;
    let tring = LocalRingPresentation::smooth(&tvars, field, dd)?;
    let central: Vec<Jet> = f.components().iter().map(|c| c.set_zero(&params)).collect();

    let mut b = Builder::new(field);
    let nb = req.basis.len();
    let c_labels = (0..nb).map(|i| format!("c[{i}]")).collect();
    let c_support = vec![monomials(tn.len(), 1, dd, |_| true); nb];
    let cblk = b.block("c", &tvars, c_labels, vec![tring.zero(); nb], c_support, None);
    let t_images: Vec<E> = params.iter().map(|&i| konst(x.var(i))).collect();
    let phi_y = if req.group == GroupTag::LR {
        let ident: Vec<Jet> = y.free_indices().into_iter().map(|i| y.var(i)).collect();
        let sh = shape_for(&y, &y, y.free_indices(), ident.clone(), ident, &|_| true, &[])?;
        Some(b.block("PhiY", y.vars(), free_labels("PhiY", &y), sh.values, sh.supports, sh.linear))
    } else {
        None
    };
    let ident: Vec<Jet> = x.free_indices().into_iter().map(|i| x.var(i)).collect();
    let sh = shape_for(&x, &x, x.free_indices(), ident.clone(), ident, &|_| true, &[])?;
    let psi = b.block("psi", x.vars(), free_labels("psi", &x), sh.values, sh.supports, sh.linear);
    let psi_ims = b.automorphism_images(psi, &x, &|i| konst(x.var(i)));
    b.preserve_ideal("valid.psi", &x, &psi_ims, &ring_ideal(&x), dd);

    // normal form components, then composed with ψ
    let nf: Vec<E> = (0..m)
        .map(|k| {
            let mut terms = vec![konst(central[k].clone())];
            for (i, v) in req.basis.iter().enumerate() {
                terms.push(mul(subst(unknown(cblk, i), t_images.clone()), konst(v[k].clone())));
            }
            subst(add(terms), psi_ims.clone())
        })
        .collect();
    let mut nk = 0;
    let y_images: Vec<E> = (0..y.nvars())
        .map(|i| {
            if y.vars().is_parameter(i) {
                konst(x.var(x.vars().index_of(y.vars().name(i)).expect("checked by the map")))
            } else {
                nk += 1;
                nf[nk - 1].clone()
            }
        })
        .collect();
    for (k, fk) in f.components().iter().enumerate() {
        let acted = match phi_y {
            Some(blk) => subst(unknown(blk, k), y_images.clone()),
            None => nf[k].clone(),
        };
        b.equation(format!("match[{k}]"), sub(konst(fk.clone()), acted), ring_ideal(&x), d - 1);
    }
    let system = b.finish();
    let newton = engine::solve_newton(&system);
    let mut outcome = newton.clone();
    let report = |outcome, log, method| NormalFormReport {
        group: req.group,
        degree: d,
        parameter_ring: tring.clone(),
        outcome,
        log,
        method,
    };
    if let (Status::Obstructed { .. }, Field::Prime(_)) = (&newton.status, field) {
        match engine::search(&system, SearchLimits::default()) {
            SearchResult::Found(o) => outcome = o,
            SearchResult::Exhausted { deepest, residual } => {
                let out = NormalFormOutcome::Obstructed { order: deepest + 1, residual, branch: Branch::Exhaustive };
                return Ok(report(out, newton.log, Method::Search));
            }
            SearchResult::Abandoned => {}
        }
    }
    let out = match outcome.status {
        Status::Solved => {
            let coefficients = outcome.values[cblk].clone();
            let tmap: Vec<usize> = params.clone();
            let mut comps = central.clone();
            for (c, v) in coefficients.iter().zip(&req.basis) {
                let ct = c.embed(x.vars(), &tmap, None);
                for k in 0..m {
                    comps[k] = &comps[k] + &(&ct * &v[k]);
                }
            }
            let normal_form = GermMap::new(&x, &y, comps)?;
            let substitution = outcome.values[psi].clone();
            let phi_x = Automorphism::new(&x, substitution.clone())?.inverse()?;
            let witness = match phi_y {
                Some(blk) => GroupElement::LR(LRElem { phi_x, phi_y: Automorphism::new(&y, outcome.values[blk].clone())? }),
                None => GroupElement::R(phi_x),
            };
            let verified = witness.apply_unchecked(&normal_form)?.equal_mod(f, d)?;
            NormalFormOutcome::Success { coefficients, normal_form, witness, substitution, verified }
        }
        Status::Obstructed { order, residual } => {
            if order <= map_order(f, d).max(1) {
                NormalFormOutcome::SeedRequired { order, residual }
            } else {
                NormalFormOutcome::Obstructed { order, residual, branch: Branch::Seed }
            }
        }
    };
    Ok(report(out, outcome.log, outcome.method))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_equivalence, SolveRequest};

    fn ring(vars: &[&str], params: &[&str], d: u32) -> Ring {
        LocalRingPresentation::parse(vars, params, Field::Rational, d, &[]).unwrap()
    }

    fn two_vertex(f: &str, ft: &str, d: u32) -> QuiverMorphismProblem {
        let (x, y) = (ring(&["x"], &[], d), ring(&["y"], &[], d));
        let q = |m: &str| {
            QuiverSpec::new()
                .vertex("X", &x)
                .vertex("Y", &y)
                .edge("X", "Y", GermMap::parse(&x, &y, &[m]).unwrap())
                .constraint("X", ConstraintKind::Invertible)
                .constraint("Y", ConstraintKind::Invertible)
        };
        QuiverMorphismProblem::new(q(ft), q(f)).unwrap()
    }

    #[test]
    fn self_loop_is_rejected() {
        let x = ring(&["x"], &[], 3);
        let q = QuiverSpec::new().vertex("v", &x).edge("v", "v", GermMap::parse(&x, &x, &["x^2"]).unwrap());
        let val = validate_quiver(&q);
        assert!(!val.valid);
        assert!(val.defects.iter().any(|d| d.kind() == "loop"));
    }

    #[test]
    fn cycles_and_forests_are_rejected() {
        let x = ring(&["x"], &[], 3);
        let id = GermMap::identity(&x);
        let cyc = QuiverSpec::new().vertex("a", &x).vertex("b", &x).edge("a", "b", id.clone()).edge("b", "a", id.clone());
        assert!(validate_quiver(&cyc).defects.iter().any(|d| d.kind() == "cycle"));
        let forest = QuiverSpec::new().vertex("a", &x).vertex("b", &x).vertex("c", &x).edge("a", "b", id);
        assert!(validate_quiver(&forest).defects.iter().any(|d| d.kind() == "disconnected"));
    }

    #[test]
    fn grades_of_a_path_and_a_star() {
        let x = ring(&["x"], &[], 3);
        let id = GermMap::identity(&x);
        let path = QuiverSpec::new()
            .vertex("r", &x)
            .vertex("a", &x)
            .vertex("b", &x)
            .vertex("c", &x)
            .edge("a", "r", id.clone())
            .edge("b", "a", id.clone())
            .edge("c", "b", id.clone());
        let g = grade_vertices(&path).unwrap();
        assert_eq!(g.root, "r");
        assert_eq!([g.grade("r"), g.grade("a"), g.grade("b"), g.grade("c")], [Some(0), Some(1), Some(2), Some(3)]);
        assert_eq!(g.chain()[0], vec!["r".to_string()]);
        let star = QuiverSpec::new()
            .vertex("o", &x)
            .vertex("p", &x)
            .vertex("q", &x)
            .edge("p", "o", id.clone())
            .edge("q", "o", id);
        let g = grade_vertices(&star).unwrap();
        assert_eq!(g.levels, vec![vec!["o".to_string()], vec!["p".to_string(), "q".to_string()]]);
    }

    #[test]
    fn two_vertex_quiver_matches_left_right() {
        let p = two_vertex("x^2", "x^2 + x^3", 5);
        let rep = solve_quiver(&p, 5).unwrap();
        let QuiverOutcome::Success { verified, .. } = &rep.outcome else { panic!("{rep:?}") };
        assert!(verified);
        let phi_x = rep.morphism("X").unwrap().germ_map().unwrap();
        let phi_y = rep.morphism("Y").unwrap().germ_map().unwrap();
        let f = &p.codomain.edges[0].map;
        let ft = &p.domain.edges[0].map;
        // Φ_Y∘f̃ = f∘Φ_X
        assert!(phi_y.compose(ft).unwrap().equal_mod(&f.compose(&phi_x).unwrap(), 5).unwrap());
        let lr = solve_equivalence(&SolveRequest::new(GroupTag::LR, f, ft, 5)).unwrap();
        assert!(lr.is_success());
    }

    #[test]
    fn identity_edges_give_identity_morphisms() {
        let x = ring(&["x", "y"], &[], 4);
        let id = GermMap::identity(&x);
        let q = QuiverSpec::new().vertex("a", &x).vertex("b", &x).vertex("c", &x).edge("b", "a", id.clone()).edge("c", "a", id);
        let p = QuiverMorphismProblem::new(q.clone(), q).unwrap();
        let rep = solve_quiver(&p, 5).unwrap();
        for v in ["a", "b", "c"] {
            assert_eq!(rep.morphism(v).unwrap().germ_map().unwrap(), GermMap::identity(&x));
        }
    }

    #[test]
    fn purification_of_a_perturbed_two_vertex_solution() {
        let p = two_vertex("x^2", "x^2 + x^3", 5);
        let rep = solve_quiver(&p, 5).unwrap();
        let QuiverOutcome::Success { morphisms, .. } = rep.outcome else { panic!() };
        let mut sol = NonPureSolution::from_pure(&p, &morphisms, 5).unwrap();
        let unchanged = purify(&sol, &p).unwrap();
        assert_eq!(unchanged.morphisms, morphisms);
        let amb = sol.ambient.ring.clone();
        let b = &sol.ambient.binomials(&p.domain, "X", "Y").unwrap()[0];
        let h = amb.parse_jet("3 + Y.y - 2 X.x Y.y").unwrap();
        let psi_x = &sol.psi["X"][0] + &(&h * b);
        sol.psi.insert("X".into(), vec![psi_x]);
        let out = purify(&sol, &p).unwrap();
        assert!(out.steps.iter().all(|s| s.holds));
        assert!(out.verified);
        assert_eq!(out.morphisms[0], morphisms[0]);
    }

    #[test]
    fn invalid_nested_solutions_are_refused() {
        let p = two_vertex("x^2", "x^2", 4);
        let rep = solve_quiver(&p, 4).unwrap();
        let QuiverOutcome::Success { morphisms, .. } = rep.outcome else { panic!() };
        let mut sol = NonPureSolution::from_pure(&p, &morphisms, 4).unwrap();
        let bump = sol.ambient.ring.parse_jet("X.x + X.x^2").unwrap();
        sol.psi.insert("X".into(), vec![bump]);
        assert!(matches!(purify(&sol, &p), Err(Error::InvalidElement(_))));
    }

    #[test]
    fn base_change_finds_the_square_substitution() {
        let d = 8;
        let x = ring(&["x"], &["t"], d);
        let y = ring(&["y"], &["t"], d);
        let q = |m: &str| {
            QuiverSpec::new()
                .vertex("X", &x)
                .vertex("Y", &y)
                .edge("X", "Y", GermMap::parse(&x, &y, &[m]).unwrap())
                .constraint("X", ConstraintKind::Identity)
                .constraint("Y", ConstraintKind::Identity)
        };
        let p = QuiverMorphismProblem::new(q("x^2 + t^2 x^3"), q("x^2 + t x^3")).unwrap();
        let rep = solve_with_base_change(&p, d + 1).unwrap();
        let QuiverOutcome::Success { base: Some(base), verified, .. } = &rep.outcome else { panic!("{rep:?}") };
        assert!(verified);
        assert_eq!(base[0].to_text(), "t^2");
        assert!(!solve_quiver(&p, d + 1).unwrap().is_success());
    }

    #[test]
    fn frozen_base_reproduces_the_fixed_base_solve() {
        let x = ring(&["x"], &["t"], 5);
        let y = ring(&["y"], &["t"], 5);
        let q = |m: &str| {
            QuiverSpec::new()
                .vertex("X", &x)
                .vertex("Y", &y)
                .edge("X", "Y", GermMap::parse(&x, &y, &[m]).unwrap())
                .constraint("X", ConstraintKind::Invertible)
                .constraint("Y", ConstraintKind::Invertible)
        };
        let mut p = QuiverMorphismProblem::new(q("x^2 + t x^3"), q("x^2")).unwrap();
        p.base_constraints.push(ConstraintKind::Identity);
        let a = solve_with_base_change(&p, 5).unwrap();
        let b = solve_quiver(&p, 5).unwrap();
        assert_eq!(a.is_success(), b.is_success());
        assert_eq!(a.morphism("X"), b.morphism("X"));
    }

    fn family(f: &str, d: u32) -> GermMap {
        let x = ring(&["x"], &["t"], d);
        let y = ring(&["y"], &["t"], d);
        GermMap::parse(&x, &y, &[f]).unwrap()
    }

    #[test]
    fn normal_form_already_reached() {
        let f = family("x^2 + t x^3", 6);
        let v = vec![f.source().parse_jet("x^3").unwrap()];
        let rep = unfolding_normal_form(&NormalFormRequest { group: GroupTag::R, family: f, basis: vec![v], degree: 7 }).unwrap();
        let NormalFormOutcome::Success { coefficients, witness, verified, .. } = rep.outcome else { panic!() };
        assert!(verified);
        assert_eq!(coefficients[0].to_text(), "t");
        assert!(witness.source_automorphism().unwrap().is_identity());
    }

    #[test]
    fn normal_form_absorbs_higher_terms() {
        let d = 12;
        let f = family("x^2 + t x^5", d);
        let x = f.source().clone();
        let v = vec![x.parse_jet("x^3").unwrap()];
        let rep = unfolding_normal_form(&NormalFormRequest { group: GroupTag::R, family: f, basis: vec![v], degree: d + 1 })
            .unwrap();
        let NormalFormOutcome::Success { coefficients, substitution, verified, .. } = rep.outcome else { panic!() };
        assert!(verified);
        assert!(coefficients[0].is_zero());
        // x(1 + t x^3)^(1/2) up to total degree 12
        assert_eq!(substitution[0], x.parse_jet("x + 1/2 t x^4 - 1/8 t^2 x^7 + 1/16 t^3 x^10").unwrap());
    }

    #[test]
    fn empty_basis_needs_a_trivial_family() {
        let f = family("x^2 + t x^2", 5);
        let ok = unfolding_normal_form(&NormalFormRequest { group: GroupTag::R, family: f, basis: vec![], degree: 6 }).unwrap();
        assert!(matches!(ok.outcome, NormalFormOutcome::Success { verified: true, .. }));
        let f = family("x^3 + t x", 5);
        let bad = unfolding_normal_form(&NormalFormRequest { group: GroupTag::LR, family: f, basis: vec![], degree: 6 }).unwrap();
        assert!(!matches!(bad.outcome, NormalFormOutcome::Success { .. }));
    }
}
