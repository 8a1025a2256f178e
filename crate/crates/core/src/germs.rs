//! Presented local rings and map-germs between them.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::ideal::IdealJet;
use crate::jet::Jet;
use crate::parse::parse_jet;
use crate::vars::VariableSet;

/// `k[[x]]/J` seen modulo `m^(D+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalRingPresentation {
    vars: Arc<VariableSet>,
    field: Field,
    trunc: u32,
    ideal: IdealJet,
}

pub type Ring = Arc<LocalRingPresentation>;

impl LocalRingPresentation {
    pub fn new(vars: &Arc<VariableSet>, field: Field, trunc: u32, generators: Vec<Jet>) -> Result<Ring> {
        if trunc < 1 {
            return Err(Error::Domain("truncation degree must be at least 1".into()));
        }
        if let Some(g) = generators.iter().find(|g| !g.in_maximal_ideal()) {
            return Err(Error::Domain(format!("ideal generator {g} is not in the maximal ideal")));
        }
        let ideal = IdealJet::new(vars, field, trunc, generators)?;
        Ok(Arc::new(LocalRingPresentation { vars: vars.clone(), field, trunc, ideal }))
    }

    pub fn smooth(vars: &Arc<VariableSet>, field: Field, trunc: u32) -> Result<Ring> {
        LocalRingPresentation::new(vars, field, trunc, Vec::new())
    }

    /// Convenience constructor from variable names and generator text.
    pub fn parse(free: &[&str], params: &[&str], field: Field, trunc: u32, generators: &[&str]) -> Result<Ring> {
        let vars = VariableSet::with_parameters(free, params);
        let gens = generators.iter().map(|g| parse_jet(g, &vars, field, trunc)).collect::<Result<Vec<_>>>()?;
        LocalRingPresentation::new(&vars, field, trunc, gens)
    }

    pub fn vars(&self) -> &Arc<VariableSet> {
        &self.vars
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn ideal(&self) -> &IdealJet {
        &self.ideal
    }

    pub fn is_smooth(&self) -> bool {
        self.ideal.is_zero()
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn free_indices(&self) -> Vec<usize> {
        self.vars.free_indices()
    }

    pub fn parameter_indices(&self) -> Vec<usize> {
        self.vars.parameter_indices()
    }

    pub fn zero(&self) -> Jet {
        Jet::zero(&self.vars, self.field, self.trunc)
    }

    pub fn one(&self) -> Jet {
        Jet::one(&self.vars, self.field, self.trunc)
    }

    pub fn var(&self, i: usize) -> Jet {
        Jet::var(&self.vars, self.field, self.trunc, i)
    }

    /// All variables as jets: the identity substitution.
    pub fn identity_images(&self) -> Vec<Jet> {
        (0..self.nvars()).map(|i| self.var(i)).collect()
    }

    pub fn parse_jet(&self, text: &str) -> Result<Jet> {
        parse_jet(text, &self.vars, self.field, self.trunc)
    }

    pub fn normal_form(&self, p: &Jet) -> Result<Jet> {
        self.ideal.normal_form(p)
    }

    pub fn is_member(&self, p: &Jet) -> Result<bool> {
        self.ideal.is_member(p)
    }

    /// Same ring presented at a lower truncation.
    pub fn with_trunc(&self, trunc: u32) -> Result<Ring> {
        let gens = self.ideal.generators().iter().map(|g| g.retrunc(trunc)).collect();
        LocalRingPresentation::new(&self.vars, self.field, trunc, gens)
    }

    /// The ring over the closed point of the base: parameters set to zero
    /// and removed. Returns the ring and the index map of kept variables.
    pub fn central_fibre(&self) -> Result<(Ring, Vec<Option<usize>>)> {
        let (vs, map) = self.vars.without_parameters();
        let params = self.vars.parameter_indices();
        let keep: Vec<usize> = map.iter().map(|m| m.unwrap_or(usize::MAX)).collect();
        let gens = self.ideal.generators().iter().map(|g| g.set_zero(&params).embed(&vs, &keep, None)).collect();
        Ok((LocalRingPresentation::new(&vs, self.field, self.trunc, gens)?, map))
    }

    /// `R_X (x) R_Y`: the union of both variable sets with ideal `J_X + J_Y`.
    /// Returns the product ring and the index maps of each factor.
    pub fn product(x: &LocalRingPresentation, y: &LocalRingPresentation) -> Result<(Ring, Vec<usize>, Vec<usize>)> {
        check_compatible(x, y)?;
        let (vs, mx, my) = VariableSet::union(&x.vars, &y.vars);
        let mut gens: Vec<Jet> = x.ideal.generators().iter().map(|g| g.embed(&vs, &mx, None)).collect();
        gens.extend(y.ideal.generators().iter().map(|g| g.embed(&vs, &my, None)));
        Ok((LocalRingPresentation::new(&vs, x.field, x.trunc, gens)?, mx, my))
    }

    pub fn describe(&self) -> String {
        let gens: Vec<String> = self.ideal.generators().iter().map(|g| g.to_text()).collect();
        format!("{} mod ({}) trunc {}", self.vars, gens.join(", "), self.trunc)
    }
}

impl fmt::Display for LocalRingPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

pub(crate) fn check_compatible(a: &LocalRingPresentation, b: &LocalRingPresentation) -> Result<()> {
    if a.field != b.field {
        return Err(Error::structural(format!("fields {} and {} differ", a.field, b.field)));
    }
    if a.trunc != b.trunc {
        return Err(Error::structural(format!("truncations {} and {} differ", a.trunc, b.trunc)));
    }
    Ok(())
}

/// A local homomorphism `R_Y -> R_X`, stored as the images of the free
/// target variables. Target parameters map to the source parameters of the
/// same name.
#[derive(Clone, Debug, PartialEq)]
pub struct GermMap {
    source: Ring,
    target: Ring,
    components: Vec<Jet>,
}

/// Outcome of [`GermMap::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidityReport {
    pub valid: bool,
    pub violations: Vec<String>,
}

impl GermMap {
    pub fn new(source: &Ring, target: &Ring, components: Vec<Jet>) -> Result<GermMap> {
        check_compatible(source, target)?;
        let nfree = target.free_indices().len();
        if components.len() != nfree {
            return Err(Error::InvalidMap(format!("{} components for {} target variables", components.len(), nfree)));
        }
        for c in &components {
            if c.vars() != source.vars() || c.field() != source.field() || c.trunc() != source.trunc() {
                return Err(Error::structural("map component lives outside the source ring"));
            }
        }
        for i in target.parameter_indices() {
            if source.vars().index_of(target.vars().name(i)).is_none() {
                return Err(Error::InvalidMap(format!(
                    "target parameter {} is missing from the source",
                    target.vars().name(i)
                )));
            }
        }
        Ok(GermMap { source: source.clone(), target: target.clone(), components })
    }

    pub fn parse(source: &Ring, target: &Ring, components: &[&str]) -> Result<GermMap> {
        let comps = components.iter().map(|c| source.parse_jet(c)).collect::<Result<Vec<_>>>()?;
        GermMap::new(source, target, comps)
    }

    pub fn identity(ring: &Ring) -> GermMap {
        let comps = ring.free_indices().into_iter().map(|i| ring.var(i)).collect();
        GermMap { source: ring.clone(), target: ring.clone(), components: comps }
    }

    pub fn source(&self) -> &Ring {
        &self.source
    }

    pub fn target(&self) -> &Ring {
        &self.target
    }

    pub fn components(&self) -> &[Jet] {
        &self.components
    }

    /// Images of every target variable, parameters included.
    pub fn images(&self) -> Vec<Jet> {
        let mut out = Vec::with_capacity(self.target.nvars());
        let mut it = self.components.iter();
        for i in 0..self.target.nvars() {
            if self.target.vars().is_parameter(i) {
                let j = self.source.vars().index_of(self.target.vars().name(i)).expect("checked at construction");
                out.push(self.source.var(j));
            } else {
                out.push(it.next().expect("one component per free variable").clone());
            }
        }
        out
    }

    /// `f^#(p)` for a jet `p` of the target ring.
    pub fn pull_back(&self, p: &Jet) -> Result<Jet> {
        p.substitute(&self.images())
    }

    /// Components in the maximal ideal and `f^#(J_Y) ⊆ J_X + m^(D+1)`.
    pub fn validate(&self) -> ValidityReport {
        let mut violations = Vec::new();
        let tv = self.target.vars();
        for (k, c) in self.components.iter().enumerate() {
            if !c.in_maximal_ideal() {
                let name = tv.name(tv.free_indices()[k]);
                violations.push(format!("component for {name} has nonzero constant term"));
            }
        }
        if violations.is_empty() {
            for q in self.target.ideal().generators() {
                let ok = self.pull_back(q).and_then(|p| self.source.is_member(&p)).unwrap_or(false);
                if !ok {
                    violations.push(format!("generator {q} does not pull back into the source ideal"));
                }
            }
        }
        ValidityReport { valid: violations.is_empty(), violations }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().valid
    }

    /// `g ∘ f` for `g: Y -> Z` (self) and `f: X -> Y`.
    pub fn compose(&self, f: &GermMap) -> Result<GermMap> {
        if self.source != f.target {
            return Err(Error::structural("middle rings differ"));
        }
        let images = f.images();
        let comps = self.components.iter().map(|c| c.substitute(&images)).collect::<Result<Vec<_>>>()?;
        GermMap::new(&f.source, &self.target, comps)
    }

    /// True when all components agree modulo `J_X + m^d`.
    pub fn equal_mod(&self, o: &GermMap, d: u32) -> Result<bool> {
        if self.source != o.source || self.target != o.target {
            return Err(Error::structural("maps between different rings"));
        }
        if d > self.source.trunc() + 1 {
            return Err(Error::Domain(format!("order {d} exceeds truncation {} + 1", self.source.trunc())));
        }
        if d == 0 {
            return Ok(true);
        }
        for (a, b) in self.components.iter().zip(&o.components) {
            if !self.source.is_member(&(a - b).retrunc(d - 1))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Componentwise normal forms modulo `J_X`.
    pub fn normalized(&self) -> GermMap {
        let comps = self.components.iter().map(|c| self.source.normal_form(c).expect("same ring")).collect();
        GermMap { source: self.source.clone(), target: self.target.clone(), components: comps }
    }

    /// The same map with every ring truncated lower.
    pub fn with_trunc(&self, trunc: u32) -> Result<GermMap> {
        GermMap::new(
            &self.source.with_trunc(trunc)?,
            &self.target.with_trunc(trunc)?,
            self.components.iter().map(|c| c.retrunc(trunc)).collect(),
        )
    }

    /// The map over the closed point of the base (`t = 0`).
    pub fn central_fibre(&self) -> Result<GermMap> {
        let (src, smap) = self.source.central_fibre()?;
        let (tgt, _) = self.target.central_fibre()?;
        let params = self.source.parameter_indices();
        let keep: Vec<usize> = smap.iter().map(|m| m.unwrap_or(usize::MAX)).collect();
        let comps = self.components.iter().map(|c| c.set_zero(&params).embed(src.vars(), &keep, None)).collect();
        GermMap::new(&src, &tgt, comps)
    }

    /// Replaces the components, keeping the rings.
    pub fn with_components(&self, components: Vec<Jet>) -> Result<GermMap> {
        GermMap::new(&self.source, &self.target, components)
    }
}

impl fmt::Display for GermMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let comps: Vec<String> = self.components.iter().map(|c| c.to_text()).collect();
        write!(f, "[{}]", comps.join("; "))
    }
}

/// An unfolding together with its central fibre.
#[derive(Clone, Debug)]
pub struct UnfoldingView {
    pub total: GermMap,
    pub central_fibre: GermMap,
}

impl UnfoldingView {
    pub fn new(total: GermMap) -> Result<UnfoldingView> {
        if !total.source().vars().has_parameters() {
            return Err(Error::Domain("unfolding needs a parameter block".into()));
        }
        let central_fibre = total.central_fibre()?;
        Ok(UnfoldingView { total, central_fibre })
    }
}
