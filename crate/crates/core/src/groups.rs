//! The equivalence groups acting on map-germs.
//!
//! Automorphisms are stored as geometric maps `x -> Φ(x)`; composition
//! `Φ∘Ψ` substitutes `Ψ` into `Φ`. The actions are
//! `ℛ: f∘Φ⁻¹`, `ℒ: Φ_Y∘f`, `ℒℛ: Φ_Y∘f∘Φ_X⁻¹`, `𝒞: C(x, f)` and
//! `𝒦: C(x, f∘Φ⁻¹)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::germs::{GermMap, LocalRingPresentation, Ring};
use crate::ideal::IdealJet;
use crate::jet::Jet;
use crate::linalg::invert_matrix;
use crate::vars::Monomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupTag {
    R,
    L,
    LR,
    C,
    K,
}

impl GroupTag {
    pub const ALL: [GroupTag; 5] = [GroupTag::R, GroupTag::L, GroupTag::LR, GroupTag::C, GroupTag::K];

    /// Whether the group reparametrizes the source.
    pub fn acts_on_source(self) -> bool {
        matches!(self, GroupTag::R | GroupTag::LR | GroupTag::K)
    }
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupTag::R => "R",
            GroupTag::L => "L",
            GroupTag::LR => "LR",
            GroupTag::C => "C",
            GroupTag::K => "K",
        })
    }
}

impl FromStr for GroupTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<GroupTag> {
        match s {
            "R" => Ok(GroupTag::R),
            "L" => Ok(GroupTag::L),
            "LR" => Ok(GroupTag::LR),
            "C" => Ok(GroupTag::C),
            "K" => Ok(GroupTag::K),
            _ => Err(Error::Domain(format!("unknown group '{s}' (expected R, L, LR, C or K)"))),
        }
    }
}

/// An automorphism of a presented local ring, fixing its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Automorphism {
    ring: Ring,
    images: Vec<Jet>,
}

impl Automorphism {
    /// Builds from the images of the free variables.
    pub fn new(ring: &Ring, free_images: Vec<Jet>) -> Result<Automorphism> {
        let free = ring.free_indices();
        if free_images.len() != free.len() {
            return Err(Error::InvalidElement(format!(
                "{} images for {} variables",
                free_images.len(),
                free.len()
            )));
        }
        let mut images = ring.identity_images();
        for (i, im) in free.into_iter().zip(free_images) {
            if im.vars() != ring.vars() || im.trunc() != ring.trunc() || im.field() != ring.field() {
                return Err(Error::structural("automorphism image lives outside its ring"));
            }
            images[i] = im;
        }
        Ok(Automorphism { ring: ring.clone(), images })
    }

    pub fn parse(ring: &Ring, images: &[&str]) -> Result<Automorphism> {
        let ims = images.iter().map(|s| ring.parse_jet(s)).collect::<Result<Vec<_>>>()?;
        Automorphism::new(ring, ims)
    }

    pub fn identity(ring: &Ring) -> Automorphism {
        Automorphism { ring: ring.clone(), images: ring.identity_images() }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    /// Images of all variables, parameters included.
    pub fn images(&self) -> &[Jet] {
        &self.images
    }

    pub fn free_images(&self) -> Vec<Jet> {
        self.ring.free_indices().into_iter().map(|i| self.images[i].clone()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images == self.ring.identity_images()
    }

    /// Coefficient matrix of the free variables in the free images.
    pub fn linear_part(&self) -> Vec<Vec<Scalar>> {
        linear_matrix(&self.ring, &self.images, &self.ring.free_indices())
    }

    pub fn validate(&self) -> Result<()> {
        for (i, im) in self.images.iter().enumerate() {
            if !im.in_maximal_ideal() {
                return Err(Error::InvalidElement(format!(
                    "image of {} has a nonzero constant term",
                    self.ring.vars().name(i)
                )));
            }
        }
        if invert_matrix(self.ring.field(), &self.linear_part()).is_none() {
            return Err(Error::InvalidElement("linear part is not invertible".into()));
        }
        for q in self.ring.ideal().generators() {
            if !self.ring.is_member(&q.substitute(&self.images)?)? {
                return Err(Error::InvalidElement(format!("generator {q} is not preserved")));
            }
        }
        Ok(())
    }

    /// `p(Φ(x))`.
    pub fn pull_back(&self, p: &Jet) -> Jet {
        p.substitute_unchecked(&self.images)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism> {
        if self.ring != other.ring {
            return Err(Error::structural("automorphisms of different rings"));
        }
        let images = self.images.iter().map(|g| g.substitute_unchecked(&other.images)).collect();
        Ok(Automorphism { ring: self.ring.clone(), images })
    }

    /// Order-by-order inverse: invert the linear part, then cancel each
    /// degree by the iteration `ψ <- ψ - A⁻¹(Φ(ψ) - x)`.
    pub fn inverse(&self) -> Result<Automorphism> {
        let free = self.ring.free_indices();
        let a = self.linear_part();
        let ainv = invert_matrix(self.ring.field(), &a)
            .ok_or_else(|| Error::InvalidElement("linear part is not invertible".into()))?;
        let ident = self.ring.identity_images();
        let mut psi = ident.clone();
        for (r, &i) in free.iter().enumerate() {
            psi[i] = lin_comb(&self.ring, &ainv[r], free.iter().map(|&j| &ident[j]));
        }
        for _ in 0..self.ring.trunc() {
            let err: Vec<Jet> = free.iter().map(|&i| &self.images[i].substitute_unchecked(&psi) - &ident[i]).collect();
            if err.iter().all(|e| e.is_zero()) {
                break;
            }
            for (r, &i) in free.iter().enumerate() {
                psi[i] = &psi[i] - &lin_comb(&self.ring, &ainv[r], err.iter());
            }
        }
        Ok(Automorphism { ring: self.ring.clone(), images: psi })
    }

    /// True when `Φ(x) - x` lies in `m^(j+1)` on the free variables.
    pub fn is_tangent_to_identity(&self, j: u32) -> bool {
        self.ring
            .free_indices()
            .into_iter()
            .all(|i| (&self.images[i] - &self.ring.var(i)).order().is_none_or(|o| o > j))
    }
}

fn lin_comb<'a>(ring: &LocalRingPresentation, coeffs: &[Scalar], jets: impl Iterator<Item = &'a Jet>) -> Jet {
    let mut acc = ring.zero();
    for (c, j) in coeffs.iter().zip(jets) {
        if !c.is_zero() {
            acc = &acc + &j.scale(c);
        }
    }
    acc
}

/// Rows: `images[rows]`; columns: coefficient of variable `cols[c]`.
fn linear_matrix(ring: &LocalRingPresentation, images: &[Jet], vars: &[usize]) -> Vec<Vec<Scalar>> {
    let n = ring.nvars();
    vars.iter()
        .map(|&i| vars.iter().map(|&j| images[i].coeff(&Monomial::var(n, j))).collect())
        .collect()
}

/// A contact automorphism of `X × Y` over `X`: `(x, y) -> (x, C(x, y))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactElem {
    source: Ring,
    target: Ring,
    product: Ring,
    map_x: Vec<usize>,
    map_y: Vec<usize>,
    c: Vec<Jet>,
}

impl ContactElem {
    /// `c[j]` is a jet over the product ring, one per free target variable.
    pub fn new(source: &Ring, target: &Ring, c: Vec<Jet>) -> Result<ContactElem> {
        let (product, map_x, map_y) = LocalRingPresentation::product(source, target)?;
        ContactElem::with_product(source, target, &product, map_x, map_y, c)
    }

    pub(crate) fn with_product(
        source: &Ring,
        target: &Ring,
        product: &Ring,
        map_x: Vec<usize>,
        map_y: Vec<usize>,
        c: Vec<Jet>,
    ) -> Result<ContactElem> {
        if c.len() != target.free_indices().len() {
            return Err(Error::InvalidElement(format!(
                "{} contact components for {} target variables",
                c.len(),
                target.free_indices().len()
            )));
        }
        for j in &c {
            if j.vars() != product.vars() || j.trunc() != product.trunc() {
                return Err(Error::structural("contact component lives outside the product ring"));
            }
        }
        Ok(ContactElem { source: source.clone(), target: target.clone(), product: product.clone(), map_x, map_y, c })
    }

    /// Parses components written in the product ring's variable names.
    pub fn parse(source: &Ring, target: &Ring, c: &[&str]) -> Result<ContactElem> {
        let (product, map_x, map_y) = LocalRingPresentation::product(source, target)?;
        let comps = c.iter().map(|s| product.parse_jet(s)).collect::<Result<Vec<_>>>()?;
        ContactElem::with_product(source, target, &product, map_x, map_y, comps)
    }

    pub fn identity(source: &Ring, target: &Ring) -> Result<ContactElem> {
        let (product, map_x, map_y) = LocalRingPresentation::product(source, target)?;
        let c = target.free_indices().into_iter().map(|j| product.var(map_y[j])).collect();
        ContactElem::with_product(source, target, &product, map_x, map_y, c)
    }

    pub fn source(&self) -> &Ring {
        &self.source
    }

    pub fn target(&self) -> &Ring {
        &self.target
    }

    pub fn product(&self) -> &Ring {
        &self.product
    }

    /// Index of each source variable in the product ring.
    pub fn map_x(&self) -> &[usize] {
        &self.map_x
    }

    /// Index of each target variable in the product ring.
    pub fn map_y(&self) -> &[usize] {
        &self.map_y
    }

    pub fn components(&self) -> &[Jet] {
        &self.c
    }

    /// Product-ring indices of the free target variables.
    pub fn y_indices(&self) -> Vec<usize> {
        self.target.free_indices().into_iter().map(|j| self.map_y[j]).collect()
    }

    /// Product-ring substitution images from images of the source variables
    /// and of the free target variables.
    pub fn product_images(&self, x_images: &[Jet], y_images: &[Jet]) -> Vec<Jet> {
        let mut out = vec![None; self.product.nvars()];
        for (i, &p) in self.map_x.iter().enumerate() {
            out[p] = Some(x_images[i].clone());
        }
        for (k, j) in self.target.free_indices().into_iter().enumerate() {
            out[self.map_y[j]] = Some(y_images[k].clone());
        }
        out.into_iter().map(|o| o.expect("every product variable covered")).collect()
    }

    fn x_identity(&self) -> Vec<Jet> {
        self.map_x.iter().map(|&p| self.product.var(p)).collect()
    }

    /// Linear part of `C(0, y)` in the free target variables.
    pub fn linear_part(&self) -> Vec<Vec<Scalar>> {
        let ys = self.y_indices();
        let n = self.product.nvars();
        self.c.iter().map(|cj| ys.iter().map(|&p| cj.coeff(&Monomial::var(n, p))).collect()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let ys = self.y_indices();
        for cj in &self.c {
            if let Some((m, _)) = cj.terms().find(|(m, _)| ys.iter().all(|&p| m.exponent(p) == 0)) {
                return Err(Error::InvalidElement(format!(
                    "C(x, 0) does not vanish: term {}",
                    m.display(self.product.vars())
                )));
            }
        }
        if invert_matrix(self.product.field(), &self.linear_part()).is_none() {
            return Err(Error::InvalidElement("C(0, y) has a singular linear part".into()));
        }
        let images = self.product_images(&self.x_identity(), &self.c);
        for q in self.target.ideal().generators() {
            let qp = q.embed(self.product.vars(), &self.map_y, None);
            if !self.product.is_member(&qp.substitute_unchecked(&images))? {
                return Err(Error::InvalidElement(format!("q(C) is not in J_X + J_Y for q = {q}")));
            }
        }
        Ok(())
    }

    /// `C(x, f(x))`, computed on the source of `f`.
    pub fn act(&self, f: &GermMap) -> Result<GermMap> {
        let src = f.source();
        let x_images = src.identity_images();
        let images = self.product_images(&x_images, f.components());
        let comps = self.c.iter().map(|cj| cj.substitute_unchecked(&images)).collect();
        f.with_components(comps)
    }

    /// `C_self(x, C_other(x, y))`.
    pub fn compose(&self, other: &ContactElem) -> Result<ContactElem> {
        self.check_same(other)?;
        let images = self.product_images(&self.x_identity(), &other.c);
        let c = self.c.iter().map(|cj| cj.substitute_unchecked(&images)).collect();
        Ok(ContactElem { c, ..self.clone() })
    }

    /// `C(Φ(x), y)` for an automorphism `Φ` of the source.
    pub fn twist(&self, phi: &Automorphism) -> ContactElem {
        let x_images: Vec<Jet> = phi.images().iter().map(|j| j.embed(self.product.vars(), &self.map_x, None)).collect();
        let y_images: Vec<Jet> = self.y_indices().into_iter().map(|p| self.product.var(p)).collect();
        let images = self.product_images(&x_images, &y_images);
        let c = self.c.iter().map(|cj| cj.substitute_unchecked(&images)).collect();
        ContactElem { c, ..self.clone() }
    }

    /// Fibrewise inverse, `C(x, C⁻¹(x, y)) = y`.
    pub fn inverse(&self) -> Result<ContactElem> {
        let field = self.product.field();
        let ainv = invert_matrix(field, &self.linear_part())
            .ok_or_else(|| Error::InvalidElement("C(0, y) has a singular linear part".into()))?;
        let ys: Vec<Jet> = self.y_indices().into_iter().map(|p| self.product.var(p)).collect();
        let xid = self.x_identity();
        let mut psi: Vec<Jet> = ainv.iter().map(|row| lin_comb(&self.product, row, ys.iter())).collect();
        for _ in 0..=self.product.trunc() {
            let images = self.product_images(&xid, &psi);
            let err: Vec<Jet> = self.c.iter().zip(&ys).map(|(cj, y)| &cj.substitute_unchecked(&images) - y).collect();
            if err.iter().all(|e| e.is_zero()) {
                break;
            }
            for (r, p) in psi.iter_mut().enumerate() {
                *p = &*p - &lin_comb(&self.product, &ainv[r], err.iter());
            }
        }
        Ok(ContactElem { c: psi, ..self.clone() })
    }

    fn check_same(&self, o: &ContactElem) -> Result<()> {
        if self.source != o.source || self.target != o.target {
            return Err(Error::structural("contact elements over different rings"));
        }
        Ok(())
    }

    /// Canonical cofactor matrix `A` with `C_j = Σ_i A_ji y_i`: each term is
    /// divided by its smallest-index target variable.
    pub fn cofactor_matrix(&self) -> Vec<Vec<Jet>> {
        let ys = self.y_indices();
        let n = self.product.nvars();
        self.c
            .iter()
            .map(|cj| {
                let mut row = vec![self.product.zero(); ys.len()];
                for (m, v) in cj.terms() {
                    let k = ys.iter().position(|&p| m.exponent(p) > 0).expect("validated: every term contains y");
                    let q = m.div(&Monomial::var(n, ys[k])).expect("divisible");
                    row[k].add_term(q, v.clone());
                }
                row
            })
            .collect()
    }
}

/// An element of `𝒦 = 𝒞 ⋊ Aut_X`.
#[derive(Clone, Debug, PartialEq)]
pub struct KElem {
    pub phi: Automorphism,
    pub c: ContactElem,
}

/// An element of `Aut_X × Aut_Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct LRElem {
    pub phi_x: Automorphism,
    pub phi_y: Automorphism,
}

/// A linearized contact witness `f -> U · (f∘Φ⁻¹)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearContact {
    /// `u[j][i]` multiplies component `i` in output component `j`.
    pub u: Vec<Vec<Jet>>,
    pub phi: Automorphism,
    /// The contact element certifying membership for singular targets.
    pub certificate: Option<ContactElem>,
}

impl LinearContact {
    /// `U · (f∘Φ⁻¹)`.
    pub fn act(&self, f: &GermMap) -> Result<GermMap> {
        let g = act_right(&self.phi, f)?;
        let comps = self
            .u
            .iter()
            .map(|row| {
                let mut acc = f.source().zero();
                for (uji, gi) in row.iter().zip(g.components()) {
                    acc = &acc + &(uji * gi);
                }
                acc
            })
            .collect();
        f.with_components(comps)
    }

    /// The constant term of `U` is invertible.
    pub fn validate(&self) -> Result<()> {
        self.phi.validate()?;
        let u0: Vec<Vec<Scalar>> = self.u.iter().map(|r| r.iter().map(|e| e.constant_term()).collect()).collect();
        if invert_matrix(self.phi.ring().field(), &u0).is_none() {
            return Err(Error::InvalidElement("U(0) is singular".into()));
        }
        if let Some(c) = &self.certificate {
            c.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GroupElement {
    R(Automorphism),
    L(Automorphism),
    LR(LRElem),
    C(ContactElem),
    K(KElem),
    Linear(LinearContact),
}

fn act_right(phi: &Automorphism, f: &GermMap) -> Result<GermMap> {
    if phi.ring() != f.source() {
        return Err(Error::structural("automorphism does not act on the source of the map"));
    }
    let inv = phi.inverse()?;
    let comps = f.components().iter().map(|c| inv.pull_back(c)).collect();
    f.with_components(comps)
}

fn act_left(phi: &Automorphism, f: &GermMap) -> Result<GermMap> {
    if phi.ring() != f.target() {
        return Err(Error::structural("automorphism does not act on the target of the map"));
    }
    let images = f.images();
    let comps = phi.free_images().iter().map(|p| p.substitute_unchecked(&images)).collect();
    f.with_components(comps)
}

fn check_contact_rings(c: &ContactElem, f: &GermMap) -> Result<()> {
    if c.source() != f.source() || c.target() != f.target() {
        return Err(Error::structural("contact element and map have different rings"));
    }
    Ok(())
}

impl GroupElement {
    pub fn tag(&self) -> Option<GroupTag> {
        Some(match self {
            GroupElement::R(_) => GroupTag::R,
            GroupElement::L(_) => GroupTag::L,
            GroupElement::LR(_) => GroupTag::LR,
            GroupElement::C(_) => GroupTag::C,
            GroupElement::K(_) => GroupTag::K,
            GroupElement::Linear(_) => return None,
        })
    }

    /// The identity of a group acting on maps `source -> target`.
    pub fn identity(tag: GroupTag, source: &Ring, target: &Ring) -> Result<GroupElement> {
        Ok(match tag {
            GroupTag::R => GroupElement::R(Automorphism::identity(source)),
            GroupTag::L => GroupElement::L(Automorphism::identity(target)),
            GroupTag::LR => GroupElement::LR(LRElem {
                phi_x: Automorphism::identity(source),
                phi_y: Automorphism::identity(target),
            }),
            GroupTag::C => GroupElement::C(ContactElem::identity(source, target)?),
            GroupTag::K => GroupElement::K(KElem {
                phi: Automorphism::identity(source),
                c: ContactElem::identity(source, target)?,
            }),
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GroupElement::R(p) | GroupElement::L(p) => p.validate(),
            GroupElement::LR(e) => {
                e.phi_x.validate()?;
                e.phi_y.validate()
            }
            GroupElement::C(c) => c.validate(),
            GroupElement::K(k) => {
                k.phi.validate()?;
                k.c.validate()
            }
            GroupElement::Linear(l) => l.validate(),
        }
    }

    /// Validates the element, then acts on `f`.
    pub fn apply(&self, f: &GermMap) -> Result<GermMap> {
        self.validate()?;
        let out = self.apply_unchecked(f)?;
        if matches!(self, GroupElement::C(_) | GroupElement::K(_)) && f.is_valid() && !out.is_valid() {
            return Err(Error::Internal("contact action produced an invalid map".into()));
        }
        Ok(out)
    }

    /// Acts on `f` without validating the element.
    pub fn apply_unchecked(&self, f: &GermMap) -> Result<GermMap> {
        match self {
            GroupElement::R(p) => act_right(p, f),
            GroupElement::L(p) => act_left(p, f),
            GroupElement::LR(e) => act_left(&e.phi_y, &act_right(&e.phi_x, f)?),
            GroupElement::C(c) => {
                check_contact_rings(c, f)?;
                c.act(f)
            }
            GroupElement::K(k) => {
                check_contact_rings(&k.c, f)?;
                k.c.act(&act_right(&k.phi, f)?)
            }
            GroupElement::Linear(l) => l.act(f),
        }
    }

    /// The group law: `apply(g.compose(h), f) = apply(g, apply(h, f))`.
    pub fn compose(&self, h: &GroupElement) -> Result<GroupElement> {
        Ok(match (self, h) {
            (GroupElement::R(a), GroupElement::R(b)) => GroupElement::R(a.compose(b)?),
            (GroupElement::L(a), GroupElement::L(b)) => GroupElement::L(a.compose(b)?),
            (GroupElement::LR(a), GroupElement::LR(b)) => GroupElement::LR(LRElem {
                phi_x: a.phi_x.compose(&b.phi_x)?,
                phi_y: a.phi_y.compose(&b.phi_y)?,
            }),
            (GroupElement::C(a), GroupElement::C(b)) => GroupElement::C(a.compose(b)?),
            (GroupElement::K(a), GroupElement::K(b)) => {
                let twisted = b.c.twist(&a.phi.inverse()?);
                GroupElement::K(KElem { phi: a.phi.compose(&b.phi)?, c: a.c.compose(&twisted)? })
            }
            _ => return Err(Error::Domain("cannot compose elements of different groups".into())),
        })
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        Ok(match self {
            GroupElement::R(p) => GroupElement::R(p.inverse()?),
            GroupElement::L(p) => GroupElement::L(p.inverse()?),
            GroupElement::LR(e) => GroupElement::LR(LRElem { phi_x: e.phi_x.inverse()?, phi_y: e.phi_y.inverse()? }),
            GroupElement::C(c) => GroupElement::C(c.inverse()?),
            GroupElement::K(k) => GroupElement::K(KElem { phi: k.phi.inverse()?, c: k.c.inverse()?.twist(&k.phi) }),
            GroupElement::Linear(_) => return Err(Error::Unsupported("inverse of a linearized contact witness".into())),
        })
    }

    /// The source automorphism, when the group has one.
    pub fn source_automorphism(&self) -> Option<&Automorphism> {
        match self {
            GroupElement::R(p) => Some(p),
            GroupElement::LR(e) => Some(&e.phi_x),
            GroupElement::K(k) => Some(&k.phi),
            GroupElement::Linear(l) => Some(&l.phi),
            _ => None,
        }
    }
}

/// `U` and `Φ` with `U · (f∘Φ⁻¹) = C(x, f∘Φ⁻¹)`, from the canonical
/// cofactor expansion `C(x, y) = A(x, y) · y`.
pub fn linearize_contact(c: &ContactElem, phi: &Automorphism, f: &GermMap) -> Result<LinearContact> {
    check_contact_rings(c, f)?;
    c.validate()?;
    phi.validate()?;
    let g = act_right(phi, f)?;
    let images = c.product_images(&f.source().identity_images(), g.components());
    let u = c
        .cofactor_matrix()
        .into_iter()
        .map(|row| row.into_iter().map(|a| a.substitute_unchecked(&images)).collect())
        .collect();
    Ok(LinearContact { u, phi: phi.clone(), certificate: Some(c.clone()) })
}

/// A filtration level `j` of a group with respect to an ideal `I ⊆ R_X`.
#[derive(Clone, Debug)]
pub struct FilteredSubgroupSpec {
    pub tag: GroupTag,
    pub level: u32,
    pub ideal: IdealJet,
}

impl FilteredSubgroupSpec {
    /// The filtration by powers of the maximal ideal of `source`.
    pub fn maximal(tag: GroupTag, level: u32, source: &Ring) -> FilteredSubgroupSpec {
        FilteredSubgroupSpec { tag, level, ideal: IdealJet::maximal(source.vars(), source.field(), source.trunc()) }
    }
}

/// Membership in the filtered subgroup `𝒢^(j)`.
pub fn filtered_member(g: &GroupElement, spec: &FilteredSubgroupSpec) -> Result<bool> {
    if let Some(q) = spec.ideal.generators().iter().find(|q| !q.in_maximal_ideal()) {
        return Err(Error::Domain(format!("filtration ideal is not in the maximal ideal: {q}")));
    }
    if g.tag() != Some(spec.tag) {
        return Err(Error::Domain(format!("element is not in the group {}", spec.tag)));
    }
    match g {
        GroupElement::R(p) => right_member(p, spec),
        GroupElement::L(p) => {
            let target = p.ring().clone();
            let e = GroupElement::L(p.clone());
            left_member(&e, &target, spec)
        }
        GroupElement::C(c) => left_member(g, &c.target().clone(), spec),
        GroupElement::LR(e) => {
            Ok(right_member(&e.phi_x, spec)? && left_member(&GroupElement::L(e.phi_y.clone()), e.phi_y.ring(), spec)?)
        }
        GroupElement::K(k) => Ok(right_member(&k.phi, spec)? && left_member(&GroupElement::C(k.c.clone()), k.c.target(), spec)?),
        GroupElement::Linear(_) => Err(Error::Unsupported("filtration of linearized contact witnesses".into())),
    }
}

fn right_member(phi: &Automorphism, spec: &FilteredSubgroupSpec) -> Result<bool> {
    let ring = phi.ring();
    if spec.ideal.vars() != ring.vars() || spec.ideal.trunc() != ring.trunc() {
        return Err(Error::structural("filtration ideal lives in another ring"));
    }
    let test = spec.ideal.power(spec.level + 1).sum(ring.ideal())?;
    for q in spec.ideal.generators() {
        if !test.is_member(&(&phi.pull_back(q) - q))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Jet-level model for target-side groups: on each basis vector `v` of
/// `I^d · R^m`, `g·v - v ∈ I^(d+j) · R^m` for all `d` with `d + j ≤ D`.
fn left_member(g: &GroupElement, target: &Ring, spec: &FilteredSubgroupSpec) -> Result<bool> {
    if !target.is_smooth() {
        return Err(Error::Unsupported(
            "filtered subgroups of target-side groups need a smooth target".into(),
        ));
    }
    let source_vars = spec.ideal.vars().clone();
    let d_max = spec.ideal.trunc();
    let source = match g {
        GroupElement::C(c) => c.source().clone(),
        _ => LocalRingPresentation::smooth(&source_vars, spec.ideal.field(), d_max)?,
    };
    if source.vars() != &source_vars {
        return Err(Error::structural("filtration ideal lives in another ring"));
    }
    let m = target.free_indices().len();
    for d in 1..=d_max {
        if d + spec.level > d_max {
            break;
        }
        let base = spec.ideal.power(d).sum(source.ideal())?;
        let test = spec.ideal.power(d + spec.level).sum(source.ideal())?;
        let basis: Vec<Jet> = base.level(d_max).rows().map(|(_, r)| base.from_row(r, d_max)).collect();
        for v in &basis {
            for i in 0..m {
                let mut comps = vec![source.zero(); m];
                comps[i] = v.clone();
                let vmap = GermMap::new(&source, target, comps.clone())?;
                let moved = g.apply_unchecked(&vmap)?;
                for (a, b) in moved.components().iter().zip(&comps) {
                    if !test.is_member(&(a - b))? {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn q() -> Field {
        Field::Rational
    }

    fn line(name: &str, d: u32) -> Ring {
        LocalRingPresentation::parse(&[name], &[], q(), d, &[]).unwrap()
    }

    #[test]
    fn inverse_of_quadratic_perturbation() {
        let x = line("x", 3);
        let phi = Automorphism::parse(&x, &["x + x^2"]).unwrap();
        let inv = phi.inverse().unwrap();
        assert_eq!(inv.free_images()[0], x.parse_jet("x - x^2 + 2x^3").unwrap());
        assert!(phi.compose(&inv).unwrap().is_identity());
        let s = Automorphism::parse(&x, &["2x"]).unwrap();
        assert_eq!(s.inverse().unwrap().free_images()[0], x.parse_jet("x/2").unwrap());
    }

    #[test]
    fn left_action_and_contact_action() {
        let x = line("x", 4);
        let y = line("y", 4);
        let f = GermMap::parse(&x, &y, &["x"]).unwrap();
        let l = GroupElement::L(Automorphism::parse(&y, &["y + y^2"]).unwrap());
        assert_eq!(l.apply(&f).unwrap().components()[0], x.parse_jet("x + x^2").unwrap());
        let f2 = GermMap::parse(&x, &y, &["x^2"]).unwrap();
        let c = GroupElement::C(ContactElem::parse(&x, &y, &["(1 + x^2) y"]).unwrap());
        assert_eq!(c.apply(&f2).unwrap().components()[0], x.parse_jet("x^2 + x^4").unwrap());
    }

    #[test]
    fn linearization_examples() {
        let x = line("x", 5);
        let y = line("y", 5);
        let f = GermMap::parse(&x, &y, &["x^2"]).unwrap();
        let c = ContactElem::parse(&x, &y, &["(1 + x^2) y"]).unwrap();
        let lin = linearize_contact(&c, &Automorphism::identity(&x), &f).unwrap();
        assert_eq!(lin.u, vec![vec![x.parse_jet("1 + x^2").unwrap()]]);

        let x2 = LocalRingPresentation::parse(&["x"], &[], q(), 4, &[]).unwrap();
        let y2 = LocalRingPresentation::parse(&["y1", "y2"], &[], q(), 4, &[]).unwrap();
        let f = GermMap::parse(&x2, &y2, &["x^2", "x^3"]).unwrap();
        let c = ContactElem::parse(&x2, &y2, &["y1 + x y2", "y2"]).unwrap();
        let lin = linearize_contact(&c, &Automorphism::identity(&x2), &f).unwrap();
        let one = x2.one();
        let xx = x2.var(0);
        assert_eq!(lin.u, vec![vec![one.clone(), xx], vec![x2.zero(), one]]);
        assert_eq!(GroupElement::Linear(lin).apply(&f).unwrap(), GroupElement::C(c).apply(&f).unwrap());
    }

    #[test]
    fn contact_validity_on_singular_target() {
        let x = line("x", 4);
        let y = LocalRingPresentation::parse(&["y"], &[], q(), 4, &["y^2"]).unwrap();
        assert!(ContactElem::parse(&x, &y, &["y + x y"]).unwrap().validate().is_ok());
        let err = ContactElem::parse(&x, &y, &["y + x"]).unwrap().validate().unwrap_err();
        assert!(matches!(err, Error::InvalidElement(_)));
    }

    #[test]
    fn filtered_examples() {
        let x = line("x", 6);
        let s = FilteredSubgroupSpec::maximal(GroupTag::R, 2, &x);
        let g = GroupElement::R(Automorphism::parse(&x, &["x + x^3"]).unwrap());
        assert!(filtered_member(&g, &s).unwrap());
        let h = GroupElement::R(Automorphism::parse(&x, &["x + x^2"]).unwrap());
        assert!(!filtered_member(&h, &s).unwrap());
        let id = GroupElement::identity(GroupTag::R, &x, &x).unwrap();
        assert!(filtered_member(&id, &s).unwrap());
    }

    #[test]
    fn singular_target_left_filtration_is_unsupported() {
        let x = line("x", 4);
        let y = LocalRingPresentation::parse(&["y"], &[], q(), 4, &["y^3"]).unwrap();
        let g = GroupElement::identity(GroupTag::L, &x, &y).unwrap();
        let s = FilteredSubgroupSpec::maximal(GroupTag::L, 1, &x);
        assert!(matches!(filtered_member(&g, &s), Err(Error::Unsupported(_))));
    }
}
