//! Implicit-function systems: the equivalence `f̃ ~ f` rewritten as
//! polynomial identities in unknown jets, with cofactor unknowns `a(x, y)`
//! for the membership in `(y - f(x))`, and a nest of variable sets.
//!
//! Conventions follow the identities as usually written:
//! ℛ: `f̃(x) - f(Φ(x))`; ℒ: `Φ_Y(y) - f(x) - (y - f̃(x))·a`;
//! ℒℛ: `Φ_Y(y) - f(Φ_X(x)) - (y - f̃(x))·a`; 𝒞: `f̃(x) - C(x, y) - (y - f(x))·a`;
//! 𝒦: `f̃(Φ(x)) - C(x, y) - (y - f(x))·a`; all modulo the quotient ideals.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::germs::{GermMap, LocalRingPresentation, Ring};
use crate::groups::{ContactElem, GroupElement, GroupTag};
use crate::jet::Jet;
use crate::vars::{BlockKind, Monomial};

/// A polynomial expression over an ambient ring with known and unknown
/// function symbols.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    /// Variable `i` of the ambient ring.
    Var(usize),
    /// Component of a known tuple, applied to one argument per variable of
    /// its ring.
    Known { known: usize, component: usize, args: Vec<Term> },
    /// Component of an unknown block, applied likewise.
    Unknown { block: usize, component: usize, args: Vec<Term> },
    Sum(Vec<Term>),
    Neg(Box<Term>),
    Product(Vec<Term>),
}

/// Known jets over a named ring (maps and ideal generators).
#[derive(Clone, Debug)]
pub struct Known {
    pub name: String,
    pub ring: usize,
    pub components: Vec<Jet>,
}

/// Unknown jets over a named ring.
#[derive(Clone, Debug)]
pub struct UnknownBlock {
    pub name: String,
    pub ring: usize,
    pub components: Vec<String>,
    /// Index into the nest chain of the smallest level containing the
    /// block's variables.
    pub nest_level: usize,
    /// Cofactor blocks enter every equation linearly.
    pub auxiliary: bool,
}

/// `lhs ∈ J + m^(D+1)` in the named ambient ring.
#[derive(Clone, Debug)]
pub struct IfsEquation {
    pub label: String,
    pub ring: usize,
    pub lhs: Term,
}

#[derive(Clone, Debug)]
pub struct IFSystem {
    pub group: GroupTag,
    pub rings: Vec<(String, Ring)>,
    pub knowns: Vec<Known>,
    pub blocks: Vec<UnknownBlock>,
    pub equations: Vec<IfsEquation>,
    /// Increasing chain of variable-name sets.
    pub nest: Vec<BTreeSet<String>>,
}

fn var(i: usize) -> Term {
    Term::Var(i)
}

fn sum(ts: Vec<Term>) -> Term {
    Term::Sum(ts)
}

fn neg(t: Term) -> Term {
    Term::Neg(Box::new(t))
}

fn prod(ts: Vec<Term>) -> Term {
    Term::Product(ts)
}

struct Ctx {
    x: Ring,
    y: Ring,
    p: Ring,
    mx: Vec<usize>,
    my: Vec<usize>,
}

const RX: usize = 0;
const RY: usize = 1;
const RP: usize = 2;

impl Ctx {
    /// Arguments `x` for a function on `X`, in the ambient ring `amb`.
    fn x_args(&self, amb: usize) -> Vec<Term> {
        (0..self.x.nvars()).map(|i| if amb == RX { var(i) } else { var(self.mx[i]) }).collect()
    }

    fn y_args(&self) -> Vec<Term> {
        (0..self.y.nvars()).map(|j| var(self.my[j])).collect()
    }

    /// Arguments `(x, y)` for a function on `X × Y` in `P`.
    fn p_args(&self) -> Vec<Term> {
        (0..self.p.nvars()).map(var).collect()
    }

    /// Arguments of a function on `X` given images of its free variables;
    /// parameters pass through.
    fn x_args_with(&self, amb: usize, free: &[Term]) -> Vec<Term> {
        let mut k = 0;
        (0..self.x.nvars())
            .map(|i| {
                if self.x.vars().is_parameter(i) {
                    if amb == RX {
                        var(i)
                    } else {
                        var(self.mx[i])
                    }
                } else {
                    k += 1;
                    free[k - 1].clone()
                }
            })
            .collect()
    }

    fn p_args_with_y(&self, free_y: &[Term]) -> Vec<Term> {
        let mut args = self.p_args();
        for (k, j) in self.y.free_indices().into_iter().enumerate() {
            args[self.my[j]] = free_y[k].clone();
        }
        args
    }
}

/// Emits the implicit-function system of `f̃ ~ f` for a group.
pub fn encode_ifs(group: GroupTag, f: &GermMap, f_tilde: &GermMap) -> Result<IFSystem> {
    if f.source() != f_tilde.source() || f.target() != f_tilde.target() {
        return Err(Error::structural("the two maps have different rings"));
    }
    let (p, mx, my) = LocalRingPresentation::product(f.source(), f.target())?;
    let cx = Ctx { x: f.source().clone(), y: f.target().clone(), p: p.clone(), mx, my };
    let rings = vec![("X".to_string(), cx.x.clone()), ("Y".to_string(), cx.y.clone()), ("XY".to_string(), p)];
    let m = cx.y.free_indices().len();
    let n = cx.x.free_indices().len();
    let mut knowns = vec![
        Known { name: "f".into(), ring: RX, components: f.components().to_vec() },
        Known { name: "ft".into(), ring: RX, components: f_tilde.components().to_vec() },
    ];
    const KF: usize = 0;
    const KFT: usize = 1;
    let mut kq_x = None;
    let mut kq_y = None;
    if !cx.x.is_smooth() {
        knowns.push(Known { name: "qX".into(), ring: RX, components: cx.x.ideal().generators().to_vec() });
        kq_x = Some(knowns.len() - 1);
    }
    if !cx.y.is_smooth() {
        knowns.push(Known { name: "qY".into(), ring: RY, components: cx.y.ideal().generators().to_vec() });
        kq_y = Some(knowns.len() - 1);
    }
    let xnames: Vec<String> = cx.x.free_indices().into_iter().map(|i| cx.x.vars().name(i).to_string()).collect();
    let ynames: Vec<String> = cx.y.free_indices().into_iter().map(|j| cx.y.vars().name(j).to_string()).collect();

    let mut blocks: Vec<UnknownBlock> = Vec::new();
    let mut add_block = |name: &str, ring: usize, components: Vec<String>, auxiliary: bool| {
        blocks.push(UnknownBlock { name: name.into(), ring, components, nest_level: 0, auxiliary });
        blocks.len() - 1
    };
    let phi_x = group.acts_on_source().then(|| add_block("PhiX", RX, xnames.clone(), false));
    let phi_y = matches!(group, GroupTag::L | GroupTag::LR).then(|| add_block("PhiY", RY, ynames.clone(), false));
    let c = matches!(group, GroupTag::C | GroupTag::K).then(|| add_block("C", RP, ynames.clone(), false));
    let a = (group != GroupTag::R).then(|| {
        let labels = ynames.iter().flat_map(|j| ynames.iter().map(move |k| format!("{j}.{k}"))).collect();
        add_block("a", RP, labels, true)
    });

    let mut eqs = Vec::new();
    let phi_terms = |amb: usize| -> Vec<Term> {
        match phi_x {
            Some(b) => (0..n).map(|k| Term::Unknown { block: b, component: k, args: cx.x_args(amb) }).collect(),
            None => cx.x.free_indices().into_iter().map(|i| if amb == RX { var(i) } else { var(cx.mx[i]) }).collect(),
        }
    };
    let known_at = |known: usize, component: usize, args: Vec<Term>| Term::Known { known, component, args };
    for j in 0..m {
        let yj = ynames[j].clone();
        match group {
            GroupTag::R => {
                let lhs = sum(vec![
                    known_at(KFT, j, cx.x_args(RX)),
                    neg(known_at(KF, j, cx.x_args_with(RX, &phi_terms(RX)))),
                ]);
                eqs.push(IfsEquation { label: format!("match.{yj}"), ring: RX, lhs });
            }
            GroupTag::L | GroupTag::LR => {
                let fx = known_at(KF, j, cx.x_args_with(RP, &phi_terms(RP)));
                let mut terms = vec![Term::Unknown { block: phi_y.unwrap(), component: j, args: cx.y_args() }, neg(fx)];
                for k in 0..m {
                    let diff = sum(vec![var(cx.my[cx.y.free_indices()[k]]), neg(known_at(KFT, k, cx.x_args(RP)))]);
                    terms.push(neg(prod(vec![diff, Term::Unknown { block: a.unwrap(), component: j * m + k, args: cx.p_args() }])));
                }
                eqs.push(IfsEquation { label: format!("match.{yj}"), ring: RP, lhs: sum(terms) });
            }
            GroupTag::C | GroupTag::K => {
                let ftx = known_at(KFT, j, cx.x_args_with(RP, &phi_terms(RP)));
                let mut terms = vec![ftx, neg(Term::Unknown { block: c.unwrap(), component: j, args: cx.p_args() })];
                for k in 0..m {
                    let diff = sum(vec![var(cx.my[cx.y.free_indices()[k]]), neg(known_at(KF, k, cx.x_args(RP)))]);
                    terms.push(neg(prod(vec![diff, Term::Unknown { block: a.unwrap(), component: j * m + k, args: cx.p_args() }])));
                }
                eqs.push(IfsEquation { label: format!("match.{yj}"), ring: RP, lhs: sum(terms) });
            }
        }
    }
    // ideal preservation
    if let (Some(b), Some(kq)) = (phi_x, kq_x) {
        let ims: Vec<Term> = (0..n).map(|k| Term::Unknown { block: b, component: k, args: cx.x_args(RX) }).collect();
        for i in 0..cx.x.ideal().generators().len() {
            eqs.push(IfsEquation { label: format!("preserve.PhiX.{i}"), ring: RX, lhs: known_at(kq, i, cx.x_args_with(RX, &ims)) });
        }
    }
    if let (Some(b), Some(kq)) = (phi_y, kq_y) {
        let own: Vec<Term> = (0..cx.y.nvars()).map(var).collect();
        let ims: Vec<Term> = (0..m).map(|k| Term::Unknown { block: b, component: k, args: own.clone() }).collect();
        let mut args = own.clone();
        for (k, j) in cx.y.free_indices().into_iter().enumerate() {
            args[j] = ims[k].clone();
        }
        for i in 0..cx.y.ideal().generators().len() {
            eqs.push(IfsEquation { label: format!("preserve.PhiY.{i}"), ring: RY, lhs: known_at(kq, i, args.clone()) });
        }
    }
    if let Some(b) = c {
        let cs: Vec<Term> = (0..m).map(|k| Term::Unknown { block: b, component: k, args: cx.p_args() }).collect();
        if let Some(kq) = kq_y {
            for i in 0..cx.y.ideal().generators().len() {
                let args = cx.p_args_with_y(&cs);
                let args = (0..cx.y.nvars()).map(|jj| args[cx.my[jj]].clone()).collect();
                eqs.push(IfsEquation { label: format!("preserve.C.{i}"), ring: RP, lhs: known_at(kq, i, args) });
            }
        }
        // C(x, 0) = 0
        let zeros: Vec<Term> = (0..m).map(|_| Term::Sum(Vec::new())).collect();
        for k in 0..m {
            let lhs = Term::Unknown { block: b, component: k, args: cx.p_args_with_y(&zeros) };
            eqs.push(IfsEquation { label: format!("fibre.C.{}", ynames[k]), ring: RP, lhs });
        }
    }

    // nest chain from the blocks' variable sets
    let names_of = |ring: usize| -> BTreeSet<String> {
        let r = match ring {
            RX => &cx.x,
            RY => &cx.y,
            _ => &rings[RP].1,
        };
        let pr = &rings[RP].1;
        let idx: Vec<usize> = match ring {
            RX => (0..r.nvars()).map(|i| cx.mx[i]).collect(),
            RY => (0..r.nvars()).map(|j| cx.my[j]).collect(),
            _ => (0..r.nvars()).collect(),
        };
        idx.into_iter().filter(|&i| !pr.vars().is_parameter(i)).map(|i| pr.vars().name(i).to_string()).collect()
    };
    // target-side automorphisms depend on y alone: the nest {y} ⊂ {x, y}
    let sets: Vec<BTreeSet<String>> = match group {
        GroupTag::R => vec![names_of(RX)],
        GroupTag::L | GroupTag::LR => vec![names_of(RY), names_of(RP)],
        GroupTag::C | GroupTag::K => vec![names_of(RP)],
    };
    for b in blocks.iter_mut() {
        let s = names_of(b.ring);
        b.nest_level = sets.iter().position(|t| s.is_subset(t)).expect("own level");
    }
    Ok(IFSystem { group, rings, knowns, blocks, equations: eqs, nest: sets })
}

impl IFSystem {
    pub fn ring(&self, i: usize) -> &Ring {
        &self.rings[i].1
    }

    /// Evaluates a term in ring `amb` given values for every block (each a
    /// jet over the block's ring).
    pub fn eval(&self, t: &Term, amb: usize, values: &[Vec<Jet>]) -> Result<Jet> {
        let r = self.ring(amb);
        Ok(match t {
            Term::Var(i) => r.var(*i),
            Term::Known { known, component, args } => {
                let ims = args.iter().map(|a| self.eval(a, amb, values)).collect::<Result<Vec<_>>>()?;
                self.knowns[*known].components[*component].substitute(&ims)?
            }
            Term::Unknown { block, component, args } => {
                let ims = args.iter().map(|a| self.eval(a, amb, values)).collect::<Result<Vec<_>>>()?;
                values[*block][*component].substitute(&ims)?
            }
            Term::Sum(ts) => {
                let mut out = r.zero();
                for t in ts {
                    out.add_assign(&self.eval(t, amb, values)?);
                }
                out
            }
            Term::Neg(t) => -&self.eval(t, amb, values)?,
            Term::Product(ts) => {
                let mut out = r.one();
                for t in ts {
                    out = &out * &self.eval(t, amb, values)?;
                }
                out
            }
        })
    }

    /// Normal forms of every equation for the given block values.
    pub fn residuals(&self, values: &[Vec<Jet>]) -> Result<Vec<(String, Jet)>> {
        self.equations
            .iter()
            .map(|e| Ok((e.label.clone(), self.ring(e.ring).normal_form(&self.eval(&e.lhs, e.ring, values)?)?)))
            .collect()
    }

    /// Block values realizing a group element `g` with `f̃ = g·f`,
    /// including the cofactors by Taylor expansion.
    pub fn values_from_witness(&self, g: &GroupElement, f: &GermMap, f_tilde: &GermMap) -> Result<Vec<Vec<Jet>>> {
        let p = self.ring(RP).clone();
        let id = ContactElem::identity(f.source(), f.target())?;
        let (mx, my) = (id.map_x().to_vec(), id.map_y().to_vec());
        let mut values: Vec<Vec<Jet>> = vec![Vec::new(); self.blocks.len()];
        let idx = |name: &str| self.blocks.iter().position(|b| b.name == name);
        let embed_x = |j: &Jet| j.embed(p.vars(), &mx, None);
        let embed_y = |j: &Jet| j.embed(p.vars(), &my, None);
        // (PhiX, PhiY in Y, C in P, base of the Taylor cofactor, sign)
        let (phi_x, phi_y, c, base, sign): (Option<Vec<Jet>>, Option<Vec<Jet>>, Option<Vec<Jet>>, Option<&GermMap>, i64) =
            match (self.group, g) {
                (GroupTag::R, GroupElement::R(phi)) => (Some(phi.inverse()?.free_images()), None, None, None, 1),
                (GroupTag::L, GroupElement::L(phi)) => (None, Some(phi.inverse()?.free_images()), None, Some(f_tilde), 1),
                (GroupTag::LR, GroupElement::LR(e)) => (
                    Some(e.phi_x.inverse()?.free_images()),
                    Some(e.phi_y.inverse()?.free_images()),
                    None,
                    Some(f_tilde),
                    1,
                ),
                (GroupTag::C, GroupElement::C(cc)) => (None, None, Some(cc.components().to_vec()), Some(f), -1),
                (GroupTag::K, GroupElement::K(k)) => {
                    (Some(k.phi.free_images()), None, Some(k.c.twist(&k.phi).components().to_vec()), Some(f), -1)
                }
                _ => return Err(Error::Domain(format!("witness is not in the group {}", self.group))),
            };
        if let (Some(b), Some(v)) = (idx("PhiX"), phi_x) {
            values[b] = v;
        }
        // the function whose Taylor cofactor is needed, over P
        let mut expanded: Option<Vec<Jet>> = None;
        if let (Some(b), Some(v)) = (idx("PhiY"), phi_y) {
            expanded = Some(v.iter().map(embed_y).collect());
            values[b] = v;
        }
        if let (Some(b), Some(v)) = (idx("C"), c) {
            expanded = Some(v.clone());
            values[b] = v;
        }
        if let (Some(b), Some(g), Some(base)) = (idx("a"), expanded, base) {
            let base: Vec<Jet> = base.components().iter().map(embed_x).collect();
            let cof = taylor_cofactors(&p, &my, &self.ring(RY).free_indices(), &g, &base)?;
            let s = p.field().from_i64(sign);
            values[b] = cof.into_iter().flatten().map(|j| j.scale(&s)).collect();
        }
        Ok(values)
    }

    /// Workspace-style text: rings, knowns, unknown blocks, nest and
    /// equations.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let field = self.ring(RX).field();
        let _ = writeln!(out, "field {field}");
        for (name, r) in &self.rings {
            let _ = writeln!(out, "{}", ring_line(name, r));
        }
        for k in &self.knowns {
            let comps: Vec<String> = k.components.iter().map(|j| j.to_text()).collect();
            let _ = writeln!(out, "known {} over {} [ {} ]", k.name, self.rings[k.ring].0, comps.join("; "));
        }
        for b in &self.blocks {
            let _ = writeln!(
                out,
                "unknown {} over {} components [ {} ] nest {}{}",
                b.name,
                self.rings[b.ring].0,
                b.components.join(" "),
                b.nest_level,
                if b.auxiliary { " auxiliary" } else { "" }
            );
        }
        let chain: Vec<String> =
            self.nest.iter().map(|s| format!("{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(","))).collect();
        let _ = writeln!(out, "nest {}", chain.join(" < "));
        for e in &self.equations {
            let _ = writeln!(out, "equation {} in {} : {}", e.label, self.rings[e.ring].0, self.term_text(&e.lhs, e.ring));
        }
        out
    }

    pub fn term_text(&self, t: &Term, amb: usize) -> String {
        let r = self.ring(amb);
        let args = |a: &[Term]| a.iter().map(|x| self.term_text(x, amb)).collect::<Vec<_>>().join(", ");
        match t {
            Term::Var(i) => r.vars().name(*i).to_string(),
            Term::Known { known, component, args: a } => {
                let k = &self.knowns[*known];
                let cname = if k.name.starts_with('q') { component.to_string() } else { self.component_name(k.ring, *component) };
                format!("{}.{}({})", k.name, cname, args(a))
            }
            Term::Unknown { block, component, args: a } => {
                let b = &self.blocks[*block];
                format!("{}.{}({})", b.name, b.components[*component], args(a))
            }
            Term::Sum(ts) if ts.is_empty() => "0".into(),
            Term::Sum(ts) => {
                let mut s = String::new();
                for (i, t) in ts.iter().enumerate() {
                    match t {
                        Term::Neg(inner) => {
                            s.push_str(if i == 0 { "-" } else { " - " });
                            s.push_str(&self.factor_text(inner, amb));
                        }
                        t => {
                            if i > 0 {
                                s.push_str(" + ");
                            }
                            s.push_str(&self.term_text(t, amb));
                        }
                    }
                }
                s
            }
            Term::Neg(inner) => format!("-{}", self.factor_text(inner, amb)),
            Term::Product(ts) => ts.iter().map(|t| self.factor_text(t, amb)).collect::<Vec<_>>().join("*"),
        }
    }

    fn factor_text(&self, t: &Term, amb: usize) -> String {
        match t {
            Term::Sum(ts) if ts.len() > 1 => format!("({})", self.term_text(t, amb)),
            _ => self.term_text(t, amb),
        }
    }

    fn component_name(&self, ring: usize, k: usize) -> String {
        let _ = ring;
        let y = self.ring(RY);
        y.vars().name(y.free_indices()[k]).to_string()
    }
}

/// `ring <name> vars … [tblock …] trunc D ideal [ … ]`.
pub fn ring_line(name: &str, r: &LocalRingPresentation) -> String {
    let mut free = Vec::new();
    let mut params = Vec::new();
    for b in r.vars().blocks() {
        let names = &r.vars().names()[b.start..b.start + b.len];
        match b.kind {
            BlockKind::Free => free.extend(names.iter().cloned()),
            BlockKind::Parameter => params.extend(names.iter().cloned()),
        }
    }
    let gens: Vec<String> = r.ideal().generators().iter().map(|g| g.to_text()).collect();
    let tblock = if params.is_empty() { String::new() } else { format!(" tblock {}", params.join(" ")) };
    let ideal = if gens.is_empty() { "[]".to_string() } else { format!("[ {} ]", gens.join("; ")) };
    format!("ring {name} vars {}{tblock} trunc {} ideal {ideal}", free.join(" "), r.trunc())
}

/// `a[j][k]` with `G_j(x, y) - G_j(x, base(x)) = Σ_k (y_k - base_k)·a[j][k]`,
/// from the expansion of `G` at `y = base + u`; each term of positive
/// `u`-degree is divided by its smallest-index `u` variable.
pub fn taylor_cofactors(p: &Ring, my: &[usize], y_free: &[usize], g: &[Jet], base: &[Jet]) -> Result<Vec<Vec<Jet>>> {
    let ys: Vec<usize> = y_free.iter().map(|&j| my[j]).collect();
    let mut shift = p.identity_images();
    let mut unshift = p.identity_images();
    for (k, &i) in ys.iter().enumerate() {
        shift[i] = &p.var(i) + &base[k];
        unshift[i] = &p.var(i) - &base[k];
    }
    let n = p.nvars();
    let mut out = Vec::new();
    for gj in g {
        let h = gj.substitute(&shift)?;
        let mut row = vec![p.zero(); ys.len()];
        for (m, c) in h.terms() {
            if let Some(k) = ys.iter().position(|&i| m.exponent(i) > 0) {
                let q = m.div(&Monomial::var(n, ys[k])).expect("divisible");
                row[k].add_term(q, c.clone());
            }
        }
        out.push(row.into_iter().map(|a| a.substitute(&unshift)).collect::<Result<Vec<_>>>()?);
    }
    Ok(out)
}
