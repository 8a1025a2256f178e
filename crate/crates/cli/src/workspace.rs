//! Workspace files: declarations of a field, rings, maps, group elements,
//! quivers and nested quiver solutions.
//!
//! ```text
//! field Q
//! ring X vars x trunc 6 ideal []
//! map f : X -> X [ x^2 ]
//! element g : R X -> X [ x + x^2 ]
//! quiver Q { vertex A ring X; edge A -> B map f; constraint A invertible; }
//! nested s : Qt -> Q degree 5 { psi A [ A.x ]; }
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use germforge_core::ifs::ring_line;
use germforge_core::parse::parse_jet_at;
use germforge_core::{
    Ambient, Automorphism, ConstraintKind, ContactElem, Field, GermMap, GroupElement, GroupTag, Jet, KElem,
    LRElem, LocalRingPresentation, NonPureSolution, QuiverSpec, Ring, VariableSet,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: undeclared {kind} `{name}`")]
    Undeclared { line: usize, column: usize, kind: &'static str, name: String },
}

type Result<T> = std::result::Result<T, WorkspaceError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl Pos {
    fn error(self, message: impl Into<String>) -> WorkspaceError {
        WorkspaceError::Syntax { line: self.line, column: self.column, message: message.into() }
    }

    fn undeclared(self, kind: &'static str, name: &str) -> WorkspaceError {
        WorkspaceError::Undeclared { line: self.line, column: self.column, kind, name: name.to_string() }
    }
}

fn core_at(pos: Pos) -> impl Fn(germforge_core::Error) -> WorkspaceError {
    move |e| match e {
        germforge_core::Error::Parse { line, column, message } => WorkspaceError::Syntax { line, column, message },
        e => pos.error(e.to_string()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapDecl {
    pub name: String,
    pub source: String,
    pub target: String,
    pub map: GermMap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementDecl {
    pub name: String,
    pub source: String,
    pub target: String,
    pub element: GroupElement,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuiverDecl {
    pub name: String,
    pub vertices: Vec<(String, String)>,
    pub edges: Vec<(String, String, String)>,
    pub constraints: Vec<(String, ConstraintKind)>,
    pub spec: QuiverSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NestedDecl {
    pub name: String,
    pub domain: String,
    pub codomain: String,
    pub solution: NonPureSolution,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Workspace {
    pub field: Option<Field>,
    pub rings: Vec<(String, Ring)>,
    pub maps: Vec<MapDecl>,
    pub elements: Vec<ElementDecl>,
    pub quivers: Vec<QuiverDecl>,
    pub nested: Vec<NestedDecl>,
}

impl Default for Workspace {
    fn default() -> Self {
        Workspace::new()
    }
}

impl Workspace {
    pub fn new() -> Workspace {
        Workspace {
            field: None,
            rings: Vec::new(),
            maps: Vec::new(),
            elements: Vec::new(),
            quivers: Vec::new(),
            nested: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Workspace> {
        let mut ws = Workspace::new();
        ws.extend(text)?;
        Ok(ws)
    }

    /// Reads further declarations into the workspace.
    pub fn extend(&mut self, text: &str) -> Result<()> {
        let mut sc = Scanner::new(text);
        let mut field_seen = false;
        loop {
            sc.skip_trivia();
            if sc.at_end() {
                return Ok(());
            }
            let (kw, pos) = sc.word()?;
            match kw.as_str() {
                "field" => {
                    if field_seen {
                        return Err(pos.error("second field declaration"));
                    }
                    field_seen = true;
                    let f = self.parse_field(&mut sc)?;
                    if self.field.is_some_and(|g| g != f) {
                        return Err(pos.error(format!("field {f} conflicts with the workspace field")));
                    }
                    self.field = Some(f);
                }
                "ring" => self.parse_ring(&mut sc, pos)?,
                "map" => self.parse_map(&mut sc, pos)?,
                "element" => self.parse_element(&mut sc, pos)?,
                "quiver" => self.parse_quiver(&mut sc, pos)?,
                "nested" => self.parse_nested(&mut sc, pos)?,
                other => return Err(pos.error(format!("unknown declaration `{other}`"))),
            }
        }
    }

    pub fn ring(&self, name: &str) -> Option<&Ring> {
        self.rings.iter().find(|(n, _)| n == name).map(|(_, r)| r)
    }

    pub fn ring_name(&self, r: &Ring) -> Option<&str> {
        self.rings.iter().find(|(_, s)| s == r).map(|(n, _)| n.as_str())
    }

    pub fn map(&self, name: &str) -> Option<&MapDecl> {
        self.maps.iter().find(|m| m.name == name)
    }

    pub fn element(&self, name: &str) -> Option<&ElementDecl> {
        self.elements.iter().find(|m| m.name == name)
    }

    pub fn quiver(&self, name: &str) -> Option<&QuiverDecl> {
        self.quivers.iter().find(|m| m.name == name)
    }

    pub fn nested_solution(&self, name: &str) -> Option<&NestedDecl> {
        self.nested.iter().find(|m| m.name == name)
    }

    /// Canonical text; parsing it yields an equal workspace.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(f) = self.field {
            let _ = writeln!(out, "field {f}");
        }
        for (name, r) in &self.rings {
            let _ = writeln!(out, "{}", ring_line(name, r));
        }
        for m in &self.maps {
            let _ = writeln!(out, "{}", map_line(&m.name, &m.source, &m.target, m.map.components()));
        }
        for e in &self.elements {
            let _ = writeln!(out, "{}", element_line(&e.name, &e.source, &e.target, &e.element).expect("parsed element"));
        }
        for q in &self.quivers {
            let _ = writeln!(out, "quiver {} {{", q.name);
            for (v, r) in &q.vertices {
                let _ = writeln!(out, "  vertex {v} ring {r};");
            }
            for (a, b, m) in &q.edges {
                let _ = writeln!(out, "  edge {a} -> {b} map {m};");
            }
            for (v, c) in &q.constraints {
                let _ = writeln!(out, "  constraint {v} {c};");
            }
            let _ = writeln!(out, "}}");
        }
        for n in &self.nested {
            out.push_str(&nested_text(&n.name, &n.domain, &n.codomain, &n.solution));
        }
        out
    }

    fn field_at(&self, pos: Pos) -> Result<Field> {
        self.field.ok_or_else(|| pos.error("no field declared"))
    }

    fn ring_at(&self, sc: &mut Scanner) -> Result<(String, Ring)> {
        let (name, pos) = sc.word()?;
        let r = self.ring(&name).ok_or_else(|| pos.undeclared("ring", &name))?.clone();
        Ok((name, r))
    }

    fn parse_field(&self, sc: &mut Scanner) -> Result<Field> {
        let (f, pos) = sc.word()?;
        match f.as_str() {
            "Q" => Ok(Field::Rational),
            "Fp" => {
                let (p, ppos) = sc.word()?;
                let p: u64 = p.parse().map_err(|_| ppos.error(format!("`{p}` is not a prime")))?;
                Field::prime(p).map_err(core_at(ppos))
            }
            other => Err(pos.error(format!("unknown field `{other}`"))),
        }
    }

    fn check_fresh<T>(list: &[T], name: &str, key: impl Fn(&T) -> &str, pos: Pos) -> Result<()> {
        if list.iter().any(|t| key(t) == name) {
            return Err(pos.error(format!("`{name}` is declared twice")));
        }
        Ok(())
    }

    fn parse_ring(&mut self, sc: &mut Scanner, pos: Pos) -> Result<()> {
        let field = self.field_at(pos)?;
        let (name, npos) = sc.word()?;
        Self::check_fresh(&self.rings, &name, |r| &r.0, npos)?;
        sc.keyword("vars")?;
        let mut free = Vec::new();
        let mut params = Vec::new();
        let mut into_params = false;
        let trunc = loop {
            let (w, wpos) = sc.word()?;
            match w.as_str() {
                "tblock" if !into_params => into_params = true,
                "trunc" => {
                    let (d, dpos) = sc.word()?;
                    break d.parse::<u32>().map_err(|_| dpos.error(format!("`{d}` is not a truncation degree")))?;
                }
                _ if into_params => params.push(w),
                _ => free.push(w),
            }
            let _ = wpos;
        };
        sc.keyword("ideal")?;
        let pieces = sc.bracket_list()?;
        let mut names: Vec<&str> = free.iter().map(String::as_str).collect();
        names.extend(params.iter().map(String::as_str));
        if let Some(dup) = names.iter().enumerate().find(|(i, n)| names[..*i].contains(n)) {
            return Err(npos.error(format!("variable `{}` is declared twice", dup.1)));
        }
        let fr: Vec<&str> = free.iter().map(String::as_str).collect();
        let pr: Vec<&str> = params.iter().map(String::as_str).collect();
        let vars = VariableSet::with_parameters(&fr, &pr);
        let gens = parse_jets(&pieces, &vars, field, trunc)?;
        let ring = LocalRingPresentation::new(&vars, field, trunc, gens).map_err(core_at(npos))?;
        self.rings.push((name, ring));
        Ok(())
    }

    fn parse_map(&mut self, sc: &mut Scanner, _pos: Pos) -> Result<()> {
        let (name, npos) = sc.word()?;
        Self::check_fresh(&self.maps, &name, |m| &m.name, npos)?;
        sc.symbol(":")?;
        let (sname, src) = self.ring_at(sc)?;
        sc.symbol("->")?;
        let (tname, tgt) = self.ring_at(sc)?;
        let bpos = sc.pos();
        let pieces = sc.bracket_list()?;
        let comps = parse_jets(&pieces, src.vars(), src.field(), src.trunc())?;
        let map = GermMap::new(&src, &tgt, comps).map_err(core_at(bpos))?;
        self.maps.push(MapDecl { name, source: sname, target: tname, map });
        Ok(())
    }

    fn parse_element(&mut self, sc: &mut Scanner, _pos: Pos) -> Result<()> {
        let (name, npos) = sc.word()?;
        Self::check_fresh(&self.elements, &name, |m| &m.name, npos)?;
        sc.symbol(":")?;
        let (tag, tpos) = sc.word()?;
        let tag = parse_tag(&tag).ok_or_else(|| tpos.error(format!("unknown group `{tag}`")))?;
        let (sname, src) = self.ring_at(sc)?;
        sc.symbol("->")?;
        let (tname, tgt) = self.ring_at(sc)?;
        let bpos = sc.pos();
        let err = core_at(bpos);
        let automorphism = |sc: &mut Scanner, r: &Ring| -> Result<Automorphism> {
            let pieces = sc.bracket_list()?;
            let images = parse_jets(&pieces, r.vars(), r.field(), r.trunc())?;
            Automorphism::new(r, images).map_err(core_at(bpos))
        };
        let element = match tag {
            GroupTag::R => GroupElement::R(automorphism(sc, &src)?),
            GroupTag::L => GroupElement::L(automorphism(sc, &tgt)?),
            GroupTag::LR => {
                let phi_x = automorphism(sc, &src)?;
                let phi_y = automorphism(sc, &tgt)?;
                GroupElement::LR(LRElem { phi_x, phi_y })
            }
            GroupTag::C => GroupElement::C(contact(sc, &src, &tgt, bpos)?),
            GroupTag::K => {
                let phi = automorphism(sc, &src)?;
                let c = contact(sc, &src, &tgt, bpos)?;
                GroupElement::K(KElem { phi, c })
            }
        };
        element.validate().map_err(err)?;
        self.elements.push(ElementDecl { name, source: sname, target: tname, element });
        Ok(())
    }

    fn parse_quiver(&mut self, sc: &mut Scanner, _pos: Pos) -> Result<()> {
        let (name, npos) = sc.word()?;
        Self::check_fresh(&self.quivers, &name, |m| &m.name, npos)?;
        sc.symbol("{")?;
        let mut decl = QuiverDecl {
            name,
            vertices: Vec::new(),
            edges: Vec::new(),
            constraints: Vec::new(),
            spec: QuiverSpec::new(),
        };
        loop {
            sc.skip_trivia();
            if sc.eat("}") {
                break;
            }
            if sc.eat(";") {
                continue;
            }
            let (kw, kpos) = sc.word()?;
            match kw.as_str() {
                "vertex" => {
                    let (id, _) = sc.word()?;
                    sc.keyword("ring")?;
                    let (rname, ring) = self.ring_at(sc)?;
                    decl.spec = decl.spec.vertex(&id, &ring);
                    decl.vertices.push((id, rname));
                }
                "edge" => {
                    let (a, apos) = sc.word()?;
                    sc.symbol("->")?;
                    let (b, bpos) = sc.word()?;
                    sc.keyword("map")?;
                    let (m, mpos) = sc.word()?;
                    let md = self.map(&m).ok_or_else(|| mpos.undeclared("map", &m))?;
                    for (v, p) in [(&a, apos), (&b, bpos)] {
                        if !decl.vertices.iter().any(|(u, _)| u == v) {
                            return Err(p.undeclared("vertex", v));
                        }
                    }
                    decl.spec = decl.spec.edge(&a, &b, md.map.clone());
                    decl.edges.push((a, b, m));
                }
                "constraint" => {
                    let (v, vpos) = sc.word()?;
                    let rname = &decl
                        .vertices
                        .iter()
                        .find(|(u, _)| *u == v)
                        .ok_or_else(|| vpos.undeclared("vertex", &v))?
                        .1;
                    let ring = self.ring(rname).expect("declared").clone();
                    let c = parse_constraint(sc, &ring)?;
                    decl.spec = decl.spec.constraint(&v, c.clone());
                    decl.constraints.push((v, c));
                }
                other => return Err(kpos.error(format!("unknown quiver statement `{other}`"))),
            }
        }
        self.quivers.push(decl);
        Ok(())
    }

    fn parse_nested(&mut self, sc: &mut Scanner, _pos: Pos) -> Result<()> {
        let (name, npos) = sc.word()?;
        Self::check_fresh(&self.nested, &name, |m| &m.name, npos)?;
        sc.symbol(":")?;
        let (domain, dpos) = sc.word()?;
        let dq = self.quiver(&domain).ok_or_else(|| dpos.undeclared("quiver", &domain))?;
        sc.symbol("->")?;
        let (codomain, cpos) = sc.word()?;
        let cq = self.quiver(&codomain).ok_or_else(|| cpos.undeclared("quiver", &codomain))?;
        sc.keyword("degree")?;
        let (d, degpos) = sc.word()?;
        let degree: u32 = d.parse().map_err(|_| degpos.error(format!("`{d}` is not a degree")))?;
        let ambient = Ambient::new(&dq.spec).map_err(core_at(dpos))?;
        sc.symbol("{")?;
        let mut psi = BTreeMap::new();
        loop {
            sc.skip_trivia();
            if sc.eat("}") {
                break;
            }
            if sc.eat(";") {
                continue;
            }
            sc.keyword("psi")?;
            let (v, vpos) = sc.word()?;
            let cring = cq.spec.ring(&v).ok_or_else(|| vpos.undeclared("vertex", &v))?;
            let pieces = sc.bracket_list()?;
            let r = &ambient.ring;
            let comps = parse_jets(&pieces, r.vars(), r.field(), r.trunc())?;
            if comps.len() != cring.free_indices().len() {
                return Err(vpos.error(format!(
                    "vertex {v} needs {} components, got {}",
                    cring.free_indices().len(),
                    comps.len()
                )));
            }
            if psi.insert(v.clone(), comps).is_some() {
                return Err(vpos.error(format!("vertex {v} is given twice")));
            }
        }
        let solution = NonPureSolution { ambient, degree, psi };
        self.nested.push(NestedDecl { name, domain, codomain, solution });
        Ok(())
    }
}

fn contact(sc: &mut Scanner, src: &Ring, tgt: &Ring, pos: Pos) -> Result<ContactElem> {
    let id = ContactElem::identity(src, tgt).map_err(core_at(pos))?;
    let p = id.product();
    let pieces = sc.bracket_list()?;
    let comps = parse_jets(&pieces, p.vars(), p.field(), p.trunc())?;
    ContactElem::new(src, tgt, comps).map_err(core_at(pos))
}

pub fn parse_tag(s: &str) -> Option<GroupTag> {
    Some(match s {
        "R" => GroupTag::R,
        "L" => GroupTag::L,
        "LR" => GroupTag::LR,
        "C" => GroupTag::C,
        "K" => GroupTag::K,
        _ => return None,
    })
}

pub fn tag_name(t: GroupTag) -> &'static str {
    match t {
        GroupTag::R => "R",
        GroupTag::L => "L",
        GroupTag::LR => "LR",
        GroupTag::C => "C",
        GroupTag::K => "K",
    }
}

fn parse_jets(pieces: &[(String, Pos)], vars: &std::sync::Arc<VariableSet>, field: Field, trunc: u32) -> Result<Vec<Jet>> {
    pieces
        .iter()
        .map(|(s, p)| parse_jet_at(s, vars, field, trunc, p.line, p.column).map_err(core_at(*p)))
        .collect()
}

/// One constraint variant with its arguments, polynomials over `ring`.
pub fn parse_constraint(sc: &mut Scanner, ring: &Ring) -> Result<ConstraintKind> {
    let (kind, pos) = sc.word()?;
    let gens = |sc: &mut Scanner| -> Result<Vec<Jet>> {
        let pieces = sc.bracket_list()?;
        parse_jets(&pieces, ring.vars(), ring.field(), ring.trunc())
    };
    Ok(match kind.as_str() {
        "identity" => ConstraintKind::Identity,
        "invertible" => ConstraintKind::Invertible,
        "ideal_offset" => ConstraintKind::IdealOffset(gens(sc)?),
        "vanish_into" => ConstraintKind::VanishInto(gens(sc)?),
        "maps_subgerm" => {
            let from = gens(sc)?;
            let into = gens(sc)?;
            ConstraintKind::MapsSubgerm { from, into }
        }
        "filtered_level" => {
            let (j, jpos) = sc.word()?;
            let level = j.parse().map_err(|_| jpos.error(format!("`{j}` is not a level")))?;
            sc.skip_trivia();
            let ideal = if sc.peek() == Some('[') { Some(gens(sc)?) } else { None };
            ConstraintKind::FilteredLevel { level, ideal }
        }
        "frozen_block" => ConstraintKind::FrozenBlock(sc.word()?.0),
        other => return Err(pos.error(format!("unknown constraint `{other}`"))),
    })
}

fn list_text(js: &[Jet]) -> String {
    if js.is_empty() {
        "[]".into()
    } else {
        format!("[ {} ]", js.iter().map(Jet::to_text).collect::<Vec<_>>().join("; "))
    }
}

pub fn map_line(name: &str, source: &str, target: &str, comps: &[Jet]) -> String {
    format!("map {name} : {source} -> {target} {}", list_text(comps))
}

/// `element` declaration of a group element, in apply convention.
pub fn element_line(name: &str, source: &str, target: &str, g: &GroupElement) -> Option<String> {
    let body = match g {
        GroupElement::R(p) | GroupElement::L(p) => list_text(&p.free_images()),
        GroupElement::LR(e) => format!("{} {}", list_text(&e.phi_x.free_images()), list_text(&e.phi_y.free_images())),
        GroupElement::C(c) => list_text(c.components()),
        GroupElement::K(k) => format!("{} {}", list_text(&k.phi.free_images()), list_text(k.c.components())),
        GroupElement::Linear(_) => return None,
    };
    Some(format!("element {name} : {} {source} -> {target} {body}", tag_name(g.tag()?)))
}

pub fn nested_text(name: &str, domain: &str, codomain: &str, sol: &NonPureSolution) -> String {
    let mut out = format!("nested {name} : {domain} -> {codomain} degree {} {{\n", sol.degree);
    for (v, comps) in &sol.psi {
        let _ = writeln!(out, "  psi {v} {};", list_text(comps));
    }
    out.push_str("}\n");
    out
}

/// Character scanner over one document.
pub struct Scanner {
    chars: Vec<char>,
    i: usize,
    line: usize,
    column: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '.'
}

impl Scanner {
    pub fn new(text: &str) -> Scanner {
        Scanner { chars: text.chars().collect(), i: 0, line: 1, column: 1 }
    }

    pub fn pos(&self) -> Pos {
        Pos { line: self.line, column: self.column }
    }

    pub fn at_end(&self) -> bool {
        self.i >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    pub fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == '#' {
                while self.peek().is_some_and(|c| c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    pub fn word(&mut self) -> Result<(String, Pos)> {
        self.skip_trivia();
        let pos = self.pos();
        let mut w = String::new();
        while let Some(c) = self.peek().filter(|&c| is_word_char(c)) {
            w.push(c);
            self.bump();
        }
        if w.is_empty() {
            return Err(match self.peek() {
                Some(c) => pos.error(format!("expected a name, found '{c}'")),
                None => pos.error("expected a name, found end of input"),
            });
        }
        Ok((w, pos))
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let (w, pos) = self.word()?;
        if w != kw {
            return Err(pos.error(format!("expected `{kw}`, found `{w}`")));
        }
        Ok(())
    }

    fn eat(&mut self, sym: &str) -> bool {
        self.skip_trivia();
        let n = sym.chars().count();
        if self.chars.len() >= self.i + n && self.chars[self.i..self.i + n].iter().copied().eq(sym.chars()) {
            for _ in 0..n {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    fn symbol(&mut self, sym: &str) -> Result<()> {
        self.skip_trivia();
        let pos = self.pos();
        if self.eat(sym) {
            Ok(())
        } else {
            let found = self.peek().map_or("end of input".to_string(), |c| format!("'{c}'"));
            Err(pos.error(format!("expected '{sym}', found {found}")))
        }
    }

    /// `[ a; b; … ]`, each piece with its position; comments are dropped.
    fn bracket_list(&mut self) -> Result<Vec<(String, Pos)>> {
        self.symbol("[")?;
        let mut out = Vec::new();
        let mut cur = String::new();
        let mut start: Option<Pos> = None;
        loop {
            let pos = self.pos();
            match self.peek() {
                None => return Err(pos.error("unterminated '['")),
                Some('#') => self.skip_trivia(),
                Some(c @ (';' | ']')) => {
                    self.bump();
                    let piece = cur.trim_end().to_string();
                    match start.take() {
                        Some(p) => out.push((piece, p)),
                        None if c == ';' => return Err(pos.error("empty entry")),
                        None => {}
                    }
                    cur.clear();
                    if c == ']' {
                        return Ok(out);
                    }
                }
                Some('[') => return Err(pos.error("unexpected '['")),
                Some(c) => {
                    if start.is_none() && !c.is_whitespace() {
                        start = Some(pos);
                    }
                    if start.is_some() {
                        cur.push(if c == '\n' { ' ' } else { c });
                    }
                    self.bump();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# sample\nfield Q\nring X vars x trunc 6 ideal []\nring Y vars y trunc 6 ideal []\nring C vars x y trunc 6 ideal [ y^2 - x^3 ]\n\
        ring T vars x tblock t trunc 6 ideal []\nmap f : X -> X [ x^2 ]\nmap g : X -> C [ x^2; x^3 ]\n\
        element e : LR X -> X [ x + x^2 ] [ 2x ]\nelement k : K X -> Y [ x ] [ y + x*y ]\n\
        quiver Q { vertex A ring X; vertex B ring X; edge A -> B map f; constraint A invertible; constraint B filtered_level 1; }\n";

    #[test]
    fn spec_examples_parse() {
        let ws = Workspace::parse(SAMPLE).unwrap();
        assert!(ws.ring("X").unwrap().is_smooth());
        assert!(!ws.ring("C").unwrap().is_smooth());
        assert_eq!(ws.map("f").unwrap().map.components()[0].to_text(), "x^2");
        assert_eq!(ws.quiver("Q").unwrap().edges.len(), 1);
        assert_eq!(ws.ring("T").unwrap().parameter_indices().len(), 1);
    }

    #[test]
    fn printing_round_trips() {
        let ws = Workspace::parse(SAMPLE).unwrap();
        let again = Workspace::parse(&ws.to_text()).unwrap();
        assert_eq!(ws, again);
        assert_eq!(ws.to_text(), again.to_text());
    }

    #[test]
    fn errors_carry_positions() {
        let e = Workspace::parse("field Q\nring X vars x trunc 6 ideal [ x^2 + ]\n").unwrap_err();
        assert!(matches!(e, WorkspaceError::Syntax { line: 2, .. }), "{e}");
        let e = Workspace::parse("field Q\nmap f : X -> X [ x ]\n").unwrap_err();
        assert!(matches!(e, WorkspaceError::Undeclared { line: 2, column: 9, kind: "ring", .. }), "{e}");
        let e = Workspace::parse("field Q\nfield Q\n").unwrap_err();
        assert!(matches!(e, WorkspaceError::Syntax { line: 2, column: 1, .. }), "{e}");
        let e = Workspace::parse("ring X vars x trunc 6 ideal []").unwrap_err();
        assert!(e.to_string().contains("no field"));
    }

    #[test]
    fn undeclared_quiver_names() {
        let base = "field Q\nring X vars x trunc 4 ideal []\nmap f : X -> X [ x ]\n";
        let e = Workspace::parse(&format!("{base}quiver Q {{ vertex A ring X; edge A -> B map f; }}")).unwrap_err();
        assert!(matches!(e, WorkspaceError::Undeclared { kind: "vertex", .. }), "{e}");
        let e = Workspace::parse(&format!("{base}quiver Q {{ vertex A ring X; edge A -> A map h; }}")).unwrap_err();
        assert!(matches!(e, WorkspaceError::Undeclared { kind: "map", .. }), "{e}");
    }

    #[test]
    fn invalid_elements_are_refused() {
        let base = "field Q\nring X vars x trunc 4 ideal []\n";
        assert!(Workspace::parse(&format!("{base}element g : R X -> X [ x^2 ]")).is_err());
    }
}
