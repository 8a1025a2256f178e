//! Truncated multivariate power series.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::vars::{Monomial, VariableSet};

/// A polynomial over an exact field representing its class modulo
/// `m^(trunc+1)`, where `m` is generated by every ring variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Jet {
    vars: Arc<VariableSet>,
    field: Field,
    trunc: u32,
    terms: BTreeMap<Monomial, Scalar>,
}

impl Jet {
    pub fn zero(vars: &Arc<VariableSet>, field: Field, trunc: u32) -> Jet {
        Jet { vars: vars.clone(), field, trunc, terms: BTreeMap::new() }
    }

    pub fn constant(vars: &Arc<VariableSet>, field: Field, trunc: u32, c: Scalar) -> Jet {
        Jet::monomial(vars, field, trunc, Monomial::one(vars.len()), c)
    }

    pub fn one(vars: &Arc<VariableSet>, field: Field, trunc: u32) -> Jet {
        Jet::constant(vars, field, trunc, field.one())
    }

    pub fn var(vars: &Arc<VariableSet>, field: Field, trunc: u32, i: usize) -> Jet {
        Jet::monomial(vars, field, trunc, Monomial::var(vars.len(), i), field.one())
    }

    pub fn monomial(vars: &Arc<VariableSet>, field: Field, trunc: u32, m: Monomial, c: Scalar) -> Jet {
        let mut j = Jet::zero(vars, field, trunc);
        j.add_term(m, c);
        j
    }

    /// Builds a jet from terms, summing repeats and discarding terms above
    /// the truncation.
    pub fn from_terms(
        vars: &Arc<VariableSet>,
        field: Field,
        trunc: u32,
        terms: impl IntoIterator<Item = (Monomial, Scalar)>,
    ) -> Jet {
        let mut j = Jet::zero(vars, field, trunc);
        for (m, c) in terms {
            j.add_term(m, c);
        }
        j
    }

    /// Adds `c * m` in place.
    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        debug_assert_eq!(m.nvars(), self.vars.len());
        if m.degree() > self.trunc || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = &*v + &c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
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

    /// Terms in ascending graded lexicographic order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Scalar)> + '_ {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(&Monomial::one(self.vars.len()))
    }

    /// True when the constant term vanishes.
    pub fn in_maximal_ideal(&self) -> bool {
        self.constant_term().is_zero()
    }

    /// Lowest degree of a nonzero term.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.degree())
    }

    /// Highest degree of a nonzero term.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.degree())
    }

    pub fn homogeneous_part(&self, k: u32) -> Jet {
        self.filter(|m| m.degree() == k)
    }

    pub fn filter(&self, mut keep: impl FnMut(&Monomial) -> bool) -> Jet {
        Jet {
            vars: self.vars.clone(),
            field: self.field,
            trunc: self.trunc,
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// The same polynomial viewed at another truncation; lowering drops
    /// the terms above the new degree.
    pub fn retrunc(&self, trunc: u32) -> Jet {
        let mut j = self.filter(|m| m.degree() <= trunc);
        j.trunc = trunc;
        j
    }

    fn check_compatible(&self, o: &Jet) -> Result<()> {
        if self.field != o.field {
            return Err(Error::structural(format!("field {} vs {}", self.field, o.field)));
        }
        if self.trunc != o.trunc {
            return Err(Error::structural(format!("truncation {} vs {}", self.trunc, o.trunc)));
        }
        if !Arc::ptr_eq(&self.vars, &o.vars) && self.vars != o.vars {
            return Err(Error::structural(format!("variables {} vs {}", self.vars, o.vars)));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Jet) -> Result<Jet> {
        self.check_compatible(o)?;
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, o: &Jet) -> Result<Jet> {
        self.try_add(&-o)
    }

    pub fn try_mul(&self, o: &Jet) -> Result<Jet> {
        self.check_compatible(o)?;
        if self.is_zero() || o.is_zero() {
            return Ok(Jet::zero(&self.vars, self.field, self.trunc));
        }
        let mut acc: HashMap<Monomial, Scalar> = HashMap::new();
        for (ma, ca) in &self.terms {
            let room = self.trunc - ma.degree();
            for (mb, cb) in &o.terms {
                if mb.degree() > room {
                    break;
                }
                let p = ca * cb;
                let m = ma.mul(mb);
                match acc.get_mut(&m) {
                    Some(v) => *v = &*v + &p,
                    None => {
                        acc.insert(m, p);
                    }
                }
            }
        }
        Ok(Jet {
            vars: self.vars.clone(),
            field: self.field,
            trunc: self.trunc,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn scale(&self, c: &Scalar) -> Jet {
        if c.is_zero() {
            return Jet::zero(&self.vars, self.field, self.trunc);
        }
        Jet {
            vars: self.vars.clone(),
            field: self.field,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    /// Multiplies by a monomial, dropping terms above the truncation.
    pub fn mul_monomial(&self, mono: &Monomial) -> Jet {
        Jet {
            vars: self.vars.clone(),
            field: self.field,
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() + mono.degree() <= self.trunc)
                .map(|(m, v)| (m.mul(mono), v.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Jet {
        let mut base = self.clone();
        let mut acc = Jet::one(&self.vars, self.field, self.trunc);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiplicative inverse of a unit (nonzero constant term).
    pub fn inverse(&self) -> Result<Jet> {
        let c0 = self.constant_term();
        let inv0 = c0.inv().ok_or_else(|| Error::Domain("jet is not a unit".into()))?;
        // u^{-1} = c0^{-1} * sum_k (-n)^k with n = c0^{-1} u - 1 nilpotent
        let n = &self.scale(&inv0) - &Jet::one(&self.vars, self.field, self.trunc);
        let mut acc = Jet::one(&self.vars, self.field, self.trunc);
        let mut p = acc.clone();
        let neg_n = -&n;
        for _ in 0..self.trunc {
            p = &p * &neg_n;
            if p.is_zero() {
                break;
            }
            acc = &acc + &p;
        }
        Ok(acc.scale(&inv0))
    }

    /// Substitutes `images[i]` for variable `i`. All images live in a common
    /// target ring and must lie in its maximal ideal. The result has the
    /// target's truncation.
    pub fn substitute(&self, images: &[Jet]) -> Result<Jet> {
        if images.len() != self.vars.len() {
            return Err(Error::structural(format!(
                "{} images for {} variables",
                images.len(),
                self.vars.len()
            )));
        }
        let Some(first) = images.first() else {
            return Ok(self.clone());
        };
        for (i, im) in images.iter().enumerate() {
            first.check_compatible(im)?;
            if !im.in_maximal_ideal() {
                return Err(Error::Domain(format!(
                    "image of {} has a nonzero constant term",
                    self.vars.name(i)
                )));
            }
        }
        Ok(self.substitute_unchecked(images))
    }

    /// As [`Jet::substitute`], without validation.
    pub(crate) fn substitute_unchecked(&self, images: &[Jet]) -> Jet {
        self.substitute_with(&mut PowerCache::new(images))
    }

    /// Substitution reusing cached powers of the images.
    pub(crate) fn substitute_with(&self, cache: &mut PowerCache<'_>) -> Jet {
        let target = &cache.images[0];
        let mut out = Jet::zero(&target.vars, target.field, target.trunc);
        for (m, c) in &self.terms {
            let mut prod: Option<Jet> = None;
            for (i, e) in m.support() {
                let p = cache.pow(i, e);
                prod = Some(match prod {
                    None => p.clone(),
                    Some(q) => &q * p,
                });
            }
            match prod {
                None => out.add_term(Monomial::one(target.vars.len()), c.clone()),
                Some(p) => {
                    for (mm, cc) in p.terms {
                        out.add_term(mm, &cc * c);
                    }
                }
            }
        }
        out
    }

    /// Overwrites the coefficient of `m`.
    pub fn set_coeff(&mut self, m: &Monomial, c: Scalar) {
        if c.is_zero() {
            self.terms.remove(m);
        } else if m.degree() <= self.trunc {
            self.terms.insert(m.clone(), c);
        }
    }

    /// Adds `c * o` in place; operands must be compatible.
    pub fn add_scaled(&mut self, o: &Jet, c: &Scalar) {
        debug_assert!(self.check_compatible(o).is_ok());
        for (m, v) in &o.terms {
            self.add_term(m.clone(), v * c);
        }
    }

    pub(crate) fn add_assign(&mut self, o: &Jet) {
        debug_assert!(self.check_compatible(o).is_ok());
        for (m, v) in &o.terms {
            self.add_term(m.clone(), v.clone());
        }
    }

    /// Substitutes by variable name; unassigned variables map to themselves.
    pub fn substitute_named(&self, assignment: &[(&str, Jet)]) -> Result<Jet> {
        let mut images: Vec<Jet> =
            (0..self.vars.len()).map(|i| Jet::var(&self.vars, self.field, self.trunc, i)).collect();
        for (name, jet) in assignment {
            let i = self
                .vars
                .index_of(name)
                .ok_or_else(|| Error::structural(format!("unknown variable {name}")))?;
            images[i] = jet.clone();
        }
        self.substitute(&images)
    }

    /// Partial derivative in variable `i`; exact up to degree `trunc - 1`.
    pub fn derivative(&self, i: usize) -> Jet {
        let mut out = Jet::zero(&self.vars, self.field, self.trunc);
        for (m, c) in &self.terms {
            let e = m.exponent(i);
            if e == 0 {
                continue;
            }
            let mut ex = m.exponents().to_vec();
            ex[i] -= 1;
            out.add_term(Monomial::from_exponents(ex), c * &self.field.from_i64(e as i64));
        }
        out
    }

    /// Sets the listed variables to zero.
    pub fn set_zero(&self, vars: &[usize]) -> Jet {
        self.filter(|m| vars.iter().all(|&i| m.exponent(i) == 0))
    }

    /// Moves the jet into another ring; `map[i]` is the index of variable `i`
    /// in `target`. The truncation is kept unless `trunc` is given.
    pub fn embed(&self, target: &Arc<VariableSet>, map: &[usize], trunc: Option<u32>) -> Jet {
        let t = trunc.unwrap_or(self.trunc);
        let mut out = Jet::zero(target, self.field, t);
        for (m, c) in &self.terms {
            let mut ex = vec![0u16; target.len()];
            for (i, e) in m.support() {
                ex[map[i]] += e;
            }
            out.add_term(Monomial::from_exponents(ex), c.clone());
        }
        out
    }

    /// Moves the jet into another ring by matching variable names; variables
    /// missing from `target` must not occur.
    pub fn embed_by_name(&self, target: &Arc<VariableSet>) -> Result<Jet> {
        let mut map = Vec::with_capacity(self.vars.len());
        for (i, n) in self.vars.names().iter().enumerate() {
            match target.index_of(n) {
                Some(j) => map.push(j),
                None => {
                    if self.terms.keys().any(|m| m.exponent(i) > 0) {
                        return Err(Error::structural(format!("variable {n} missing from {target}")));
                    }
                    map.push(usize::MAX);
                }
            }
        }
        let mut out = Jet::zero(target, self.field, self.trunc);
        for (m, c) in &self.terms {
            let mut ex = vec![0u16; target.len()];
            for (i, e) in m.support() {
                ex[map[i]] += e;
            }
            out.add_term(Monomial::from_exponents(ex), c.clone());
        }
        Ok(out)
    }

    /// Human-readable form, lowest degree first.
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut ordered: Vec<(&Monomial, &Scalar)> = self.terms.iter().collect();
        ordered.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then_with(|| b.0.cmp(a.0)));
        let mut s = String::new();
        for (k, (m, c)) in ordered.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = if neg { -c } else { c.clone() };
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            if m.degree() == 0 {
                s.push_str(&abs.to_string());
            } else if abs.is_one() {
                s.push_str(&m.display(&self.vars));
            } else {
                s.push_str(&format!("{} {}", abs, m.display(&self.vars)));
            }
        }
        s
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Lazily computed powers of the substitution images.
pub(crate) struct PowerCache<'a> {
    images: &'a [Jet],
    pows: Vec<Vec<Jet>>,
}

impl<'a> PowerCache<'a> {
    pub(crate) fn new(images: &'a [Jet]) -> Self {
        PowerCache { images, pows: vec![Vec::new(); images.len()] }
    }

    fn pow(&mut self, i: usize, e: u16) -> &Jet {
        let e = e as usize;
        while self.pows[i].len() < e {
            let next = match self.pows[i].last() {
                None => self.images[i].clone(),
                Some(p) => p * &self.images[i],
            };
            self.pows[i].push(next);
        }
        &self.pows[i][e - 1]
    }
}

impl Add for &Jet {
    type Output = Jet;
    /// Panics on incompatible operands; see [`Jet::try_add`].
    fn add(self, o: &Jet) -> Jet {
        self.try_add(o).expect("compatible jets")
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        self.try_sub(o).expect("compatible jets")
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        self.try_mul(o).expect("compatible jets")
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            vars: self.vars.clone(),
            field: self.field,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}
