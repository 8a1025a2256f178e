//! Ideals at jet scale: membership and normal forms modulo `J + m^(k+1)`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::jet::Jet;
use crate::linalg::{Echelon, SparseRow};
use crate::vars::{Monomial, MonomialIndex, VariableSet};

/// An ideal given by generators, with a reduced echelon basis of
/// `(J + m^(k+1)) / m^(k+1)` for every level `k <= trunc`.
///
/// Columns are monomials in descending graded lexicographic order, so the
/// pivot of each basis row is its largest monomial.
pub struct IdealJet {
    vars: Arc<VariableSet>,
    field: Field,
    trunc: u32,
    generators: Vec<Jet>,
    index: Arc<MonomialIndex>,
    levels: Vec<OnceLock<Echelon>>,
}

impl Clone for IdealJet {
    fn clone(&self) -> Self {
        IdealJet {
            vars: self.vars.clone(),
            field: self.field,
            trunc: self.trunc,
            generators: self.generators.clone(),
            index: self.index.clone(),
            levels: self
                .levels
                .iter()
                .map(|l| {
                    let c = OnceLock::new();
                    if let Some(e) = l.get() {
                        let _ = c.set(e.clone());
                    }
                    c
                })
                .collect(),
        }
    }
}

impl fmt::Debug for IdealJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IdealJet")
            .field("vars", &self.vars.names())
            .field("trunc", &self.trunc)
            .field("generators", &self.generators.iter().map(|g| g.to_text()).collect::<Vec<_>>())
            .finish()
    }
}

impl PartialEq for IdealJet {
    /// Equal presentations: same ring and same generator list.
    fn eq(&self, o: &Self) -> bool {
        self.vars == o.vars && self.field == o.field && self.trunc == o.trunc && self.generators == o.generators
    }
}

impl IdealJet {
    pub fn new(vars: &Arc<VariableSet>, field: Field, trunc: u32, generators: Vec<Jet>) -> Result<IdealJet> {
        for g in &generators {
            if g.field() != field || g.trunc() != trunc || g.vars() != vars {
                return Err(Error::structural("ideal generator lives in another ring"));
            }
        }
        let generators = generators.into_iter().filter(|g| !g.is_zero()).collect();
        Ok(IdealJet {
            vars: vars.clone(),
            field,
            trunc,
            generators,
            index: MonomialIndex::get(vars.len(), trunc),
            levels: (0..=trunc).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn zero(vars: &Arc<VariableSet>, field: Field, trunc: u32) -> IdealJet {
        IdealJet::new(vars, field, trunc, Vec::new()).expect("no generators")
    }

    /// The maximal ideal, generated by all variables.
    pub fn maximal(vars: &Arc<VariableSet>, field: Field, trunc: u32) -> IdealJet {
        let gens = (0..vars.len()).map(|i| Jet::var(vars, field, trunc, i)).collect();
        IdealJet::new(vars, field, trunc, gens).expect("same ring")
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

    pub fn generators(&self) -> &[Jet] {
        &self.generators
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn monomial_index(&self) -> &Arc<MonomialIndex> {
        &self.index
    }

    /// Sum with another ideal of the same ring.
    pub fn sum(&self, o: &IdealJet) -> Result<IdealJet> {
        let mut g = self.generators.clone();
        g.extend(o.generators.iter().cloned());
        IdealJet::new(&self.vars, self.field, self.trunc, g)
    }

    /// Product of two ideals (pairwise generator products).
    pub fn product(&self, o: &IdealJet) -> Result<IdealJet> {
        let mut g = Vec::new();
        for a in &self.generators {
            for b in &o.generators {
                g.push(a.try_mul(b)?);
            }
        }
        IdealJet::new(&self.vars, self.field, self.trunc, g)
    }

    /// `J^e`, with `J^0` the unit ideal.
    pub fn power(&self, e: u32) -> IdealJet {
        let mut acc = IdealJet::new(&self.vars, self.field, self.trunc, vec![Jet::one(&self.vars, self.field, self.trunc)])
            .expect("same ring");
        for _ in 0..e {
            acc = acc.product(self).expect("same ring");
            acc = acc.pruned();
        }
        acc
    }

    /// Drops generators that already lie in the span of the others.
    fn pruned(&self) -> IdealJet {
        let mut ech = Echelon::new(self.field);
        let mut keep = Vec::new();
        for g in &self.generators {
            if ech.insert(&self.to_row(g)).is_some() {
                keep.push(g.clone());
            }
        }
        // a subset with the same linear span generates the same ideal
        IdealJet::new(&self.vars, self.field, self.trunc, keep).expect("same ring")
    }

    /// The jet as a row over this ideal's monomial columns.
    pub fn to_row(&self, p: &Jet) -> SparseRow {
        let mut r: SparseRow =
            p.terms().map(|(m, c)| (self.index.index(m).expect("monomial within truncation"), c.clone())).collect();
        r.sort_by_key(|e| e.0);
        r
    }

    pub fn from_row(&self, row: &SparseRow, trunc: u32) -> Jet {
        Jet::from_terms(
            &self.vars,
            self.field,
            trunc,
            row.iter().map(|(c, v)| (self.index.monomials[*c].clone(), v.clone())),
        )
    }

    /// Reduced echelon basis of the span of `{m * g}` modulo `m^(k+1)`.
    pub fn level(&self, k: u32) -> &Echelon {
        self.levels[k as usize].get_or_init(|| {
            let mut ech = Echelon::new(self.field);
            let all = MonomialIndex::get(self.vars.len(), k);
            for g in &self.generators {
                let gk = g.retrunc(k);
                if gk.is_zero() {
                    continue;
                }
                let room = k - gk.order().unwrap_or(0);
                for m in all.monomials.iter().rev() {
                    if m.degree() > room {
                        break;
                    }
                    let row = self.to_row(&gk.mul_monomial(m));
                    ech.insert(&row);
                }
            }
            ech
        })
    }

    fn check(&self, p: &Jet) -> Result<()> {
        if p.field() != self.field || p.vars() != &self.vars {
            return Err(Error::structural("jet and ideal live in different rings"));
        }
        if p.trunc() > self.trunc {
            return Err(Error::structural(format!(
                "jet truncation {} exceeds ideal truncation {}",
                p.trunc(),
                self.trunc
            )));
        }
        Ok(())
    }

    /// Canonical representative of `p + J + m^(trunc(p)+1)`, supported on
    /// non-pivot monomials.
    pub fn normal_form(&self, p: &Jet) -> Result<Jet> {
        self.check(p)?;
        let k = p.trunc();
        Ok(self.from_row(&self.level(k).reduce(&self.to_row(p)), k))
    }

    /// Normal form coordinates at level `k` as a sparse row.
    pub fn normal_form_row(&self, p: &Jet, k: u32) -> SparseRow {
        self.level(k).reduce(&self.to_row(&p.retrunc(k)))
    }

    pub fn is_member(&self, p: &Jet) -> Result<bool> {
        Ok(self.normal_form(p)?.is_zero())
    }

    /// Monomials of degree `<= k` spanning the quotient modulo `J + m^(k+1)`,
    /// in ascending order.
    pub fn quotient_monomial_basis(&self, k: u32) -> Result<Vec<Monomial>> {
        if k > self.trunc {
            return Err(Error::Domain(format!("degree {k} exceeds truncation {}", self.trunc)));
        }
        let lvl = self.level(k);
        Ok(self
            .index
            .monomials
            .iter()
            .enumerate()
            .rev()
            .filter(|(c, m)| m.degree() <= k && !lvl.is_pivot(*c))
            .map(|(_, m)| m.clone())
            .collect())
    }

    /// Rank of the reduced basis at level `k`.
    pub fn rank(&self, k: u32) -> usize {
        self.level(k).rank()
    }

    /// The same generators moved into another ring by variable name.
    pub fn embed_by_name(&self, vars: &Arc<VariableSet>, trunc: u32) -> Result<IdealJet> {
        let gens = self
            .generators
            .iter()
            .map(|g| g.embed_by_name(vars).map(|j| j.retrunc(trunc)))
            .collect::<Result<Vec<_>>>()?;
        IdealJet::new(vars, self.field, trunc, gens)
    }

    /// The same generators moved into another ring by index map.
    pub fn embed(&self, vars: &Arc<VariableSet>, map: &[usize], trunc: u32) -> IdealJet {
        let gens = self.generators.iter().map(|g| g.embed(vars, map, Some(trunc))).collect();
        IdealJet::new(vars, self.field, trunc, gens).expect("same ring")
    }
}
