//! Variable sets, blocks and monomials under the graded lexicographic order.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    /// Ordinary coordinates (x-, y-, z-blocks).
    Free,
    /// Parameters of the base ring (t-blocks); fixed by every automorphism.
    Parameter,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Block {
    pub name: String,
    pub kind: BlockKind,
    pub start: usize,
    pub len: usize,
}

/// An ordered list of uniquely named variables, partitioned into blocks.
/// Variables are laid out block by block, so index order is the monomial
/// order's tie-break.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VariableSet {
    names: Vec<String>,
    blocks: Vec<Block>,
}

impl VariableSet {
    pub fn new(blocks: Vec<(String, BlockKind, Vec<String>)>) -> Result<Arc<VariableSet>> {
        let mut names = Vec::new();
        let mut out = Vec::new();
        for (name, kind, vars) in blocks {
            if out.iter().any(|b: &Block| b.name == name) {
                return Err(Error::structural(format!("duplicate block name {name}")));
            }
            out.push(Block { name, kind, start: names.len(), len: vars.len() });
            for v in vars {
                if names.contains(&v) {
                    return Err(Error::structural(format!("duplicate variable {v}")));
                }
                names.push(v);
            }
        }
        Ok(Arc::new(VariableSet { names, blocks: out }))
    }

    /// A single free block named `x`.
    pub fn free(names: &[&str]) -> Arc<VariableSet> {
        Self::with_parameters(names, &[])
    }

    /// A free block `x` followed by a parameter block `t`.
    pub fn with_parameters(free: &[&str], params: &[&str]) -> Arc<VariableSet> {
        let mut blocks = vec![("x".to_string(), BlockKind::Free, free.iter().map(|s| s.to_string()).collect())];
        if !params.is_empty() {
            blocks.push(("t".to_string(), BlockKind::Parameter, params.iter().map(|s| s.to_string()).collect()));
        }
        Self::new(blocks).expect("distinct variable names")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn block_of(&self, i: usize) -> &Block {
        self.blocks.iter().find(|b| i >= b.start && i < b.start + b.len).expect("variable index in range")
    }

    pub fn is_parameter(&self, i: usize) -> bool {
        self.block_of(i).kind == BlockKind::Parameter
    }

    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_parameter(i)).collect()
    }

    pub fn parameter_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_parameter(i)).collect()
    }

    pub fn parameter_names(&self) -> Vec<&str> {
        self.parameter_indices().into_iter().map(|i| self.name(i)).collect()
    }

    pub fn has_parameters(&self) -> bool {
        self.blocks.iter().any(|b| b.kind == BlockKind::Parameter && b.len > 0)
    }

    /// Union of two variable sets. Parameters with equal names are shared;
    /// a clashing free name from `b` is primed until unique. Returns the
    /// union and the index maps of `a` and `b` into it.
    pub fn union(a: &VariableSet, b: &VariableSet) -> (Arc<VariableSet>, Vec<usize>, Vec<usize>) {
        let mut blocks: Vec<(String, BlockKind, Vec<String>)> = Vec::new();
        let mut taken: Vec<String> = Vec::new();
        for blk in a.blocks.iter().filter(|b| b.kind == BlockKind::Free) {
            let vars: Vec<String> = a.names[blk.start..blk.start + blk.len].to_vec();
            taken.extend(vars.iter().cloned());
            blocks.push((blk.name.clone(), BlockKind::Free, vars));
        }
        let params_a: Vec<String> = a.parameter_indices().into_iter().map(|i| a.names[i].clone()).collect();
        for (bi, blk) in b.blocks.iter().filter(|b| b.kind == BlockKind::Free).enumerate() {
            let mut vars = Vec::new();
            for v in &b.names[blk.start..blk.start + blk.len] {
                let mut name = v.clone();
                while taken.contains(&name) || params_a.contains(&name) {
                    name.push('\'');
                }
                taken.push(name.clone());
                vars.push(name);
            }
            let mut bname = blk.name.clone();
            while blocks.iter().any(|(n, _, _)| *n == bname) {
                bname = format!("{bname}{bi}");
                bname.push('\'');
            }
            blocks.push((bname, BlockKind::Free, vars));
        }
        let mut params = params_a.clone();
        for i in b.parameter_indices() {
            let n = &b.names[i];
            if !params.contains(n) {
                let mut name = n.clone();
                while taken.contains(&name) {
                    name.push('\'');
                }
                params.push(name);
            }
        }
        if !params.is_empty() {
            let mut pname = "t".to_string();
            while blocks.iter().any(|(n, _, _)| *n == pname) {
                pname.push('\'');
            }
            blocks.push((pname, BlockKind::Parameter, params));
        }
        let vs = VariableSet::new(blocks).expect("union keeps names unique");
        // free variables of `b` are located positionally: they follow a's free vars
        let a_free = a.free_indices().len();
        let map_a = (0..a.len())
            .map(|i| if a.is_parameter(i) { vs.index_of(&a.names[i]).unwrap() } else { a.free_indices().iter().position(|&j| j == i).unwrap() })
            .collect();
        let b_free = b.free_indices();
        let map_b = (0..b.len())
            .map(|i| {
                if b.is_parameter(i) {
                    let n = &b.names[i];
                    vs.index_of(n).unwrap_or_else(|| {
                        // renamed parameter
                        let mut name = n.clone();
                        while vs.index_of(&name).is_none() {
                            name.push('\'');
                        }
                        vs.index_of(&name).unwrap()
                    })
                } else {
                    a_free + b_free.iter().position(|&j| j == i).unwrap()
                }
            })
            .collect();
        (vs, map_a, map_b)
    }

    /// The set with all parameter blocks removed, and the index map from
    /// the kept variables into it.
    pub fn without_parameters(&self) -> (Arc<VariableSet>, Vec<Option<usize>>) {
        let blocks = self
            .blocks
            .iter()
            .filter(|b| b.kind == BlockKind::Free)
            .map(|b| (b.name.clone(), b.kind, self.names[b.start..b.start + b.len].to_vec()))
            .collect();
        let vs = VariableSet::new(blocks).expect("subset of unique names");
        let map = (0..self.len()).map(|i| if self.is_parameter(i) { None } else { vs.index_of(&self.names[i]) }).collect();
        (vs, map)
    }
}

impl fmt::Display for VariableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.names.join(", "))
    }
}

/// Exponent vector with cached total degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Box<[u16]>,
    degree: u32,
}

impl Monomial {
    pub fn one(nvars: usize) -> Monomial {
        Monomial { exps: vec![0; nvars].into_boxed_slice(), degree: 0 }
    }

    pub fn from_exponents(exps: Vec<u16>) -> Monomial {
        let degree = exps.iter().map(|&e| e as u32).sum();
        Monomial { exps: exps.into_boxed_slice(), degree }
    }

    pub fn var(nvars: usize, i: usize) -> Monomial {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial::from_exponents(e)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exponents(&self) -> &[u16] {
        &self.exps
    }

    pub fn exponent(&self, i: usize) -> u16 {
        self.exps[i]
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let exps: Vec<u16> = self.exps.iter().zip(o.exps.iter()).map(|(a, b)| a + b).collect();
        Monomial { exps: exps.into_boxed_slice(), degree: self.degree + o.degree }
    }

    /// `self / o` when `o` divides `self`.
    pub fn div(&self, o: &Monomial) -> Option<Monomial> {
        let mut exps = Vec::with_capacity(self.exps.len());
        for (a, b) in self.exps.iter().zip(o.exps.iter()) {
            exps.push(a.checked_sub(*b)?);
        }
        Some(Monomial { exps: exps.into_boxed_slice(), degree: self.degree - o.degree })
    }

    /// Variables with positive exponent, as `(index, exponent)`.
    pub fn support(&self) -> impl Iterator<Item = (usize, u16)> + '_ {
        self.exps.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e))
    }

    pub fn display(&self, vars: &VariableSet) -> String {
        if self.degree == 0 {
            return "1".into();
        }
        self.support()
            .map(|(i, e)| if e == 1 { vars.name(i).to_string() } else { format!("{}^{e}", vars.name(i)) })
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: higher degree is larger; ties compare
    /// exponents in variable order, a larger leading exponent being larger.
    fn cmp(&self, o: &Monomial) -> Ordering {
        self.degree.cmp(&o.degree).then_with(|| self.exps.cmp(&o.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Monomial) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// All monomials of degree `<= max_degree` in `nvars` variables, sorted
/// from largest to smallest, with a reverse lookup table.
#[derive(Debug)]
pub struct MonomialIndex {
    pub monomials: Vec<Monomial>,
    lookup: HashMap<Monomial, usize>,
}

impl MonomialIndex {
    pub fn get(nvars: usize, max_degree: u32) -> Arc<MonomialIndex> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<MonomialIndex>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(ix) = cache.lock().unwrap().get(&(nvars, max_degree)) {
            return ix.clone();
        }
        let mut monomials = Vec::new();
        let mut cur = vec![0u16; nvars];
        enumerate(&mut cur, 0, max_degree, &mut monomials);
        monomials.sort_by(|a, b| b.cmp(a));
        let lookup = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let ix = Arc::new(MonomialIndex { monomials, lookup });
        cache.lock().unwrap().insert((nvars, max_degree), ix.clone());
        ix
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn index(&self, m: &Monomial) -> Option<usize> {
        self.lookup.get(m).copied()
    }
}

fn enumerate(cur: &mut Vec<u16>, i: usize, budget: u32, out: &mut Vec<Monomial>) {
    if i == cur.len() {
        out.push(Monomial::from_exponents(cur.clone()));
        return;
    }
    for e in 0..=budget {
        cur[i] = e as u16;
        enumerate(cur, i + 1, budget - e, out);
    }
    cur[i] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grlex_order() {
        let x = Monomial::from_exponents(vec![1, 0]);
        let y = Monomial::from_exponents(vec![0, 1]);
        let y2 = Monomial::from_exponents(vec![0, 2]);
        let x3 = Monomial::from_exponents(vec![3, 0]);
        assert!(x > y);
        assert!(y2 > x);
        assert!(x3 > y2);
    }

    #[test]
    fn monomial_index_counts() {
        let ix = MonomialIndex::get(2, 3);
        assert_eq!(ix.len(), 10);
        assert_eq!(ix.monomials[0], Monomial::from_exponents(vec![3, 0]));
        assert_eq!(ix.monomials.last().unwrap().degree(), 0);
    }

    #[test]
    fn union_shares_parameters_and_primes_clashes() {
        let a = VariableSet::with_parameters(&["x"], &["t"]);
        let b = VariableSet::with_parameters(&["x", "y"], &["t"]);
        let (u, ma, mb) = VariableSet::union(&a, &b);
        assert_eq!(u.names(), &["x", "x'", "y", "t"]);
        assert_eq!(ma, vec![0, 3]);
        assert_eq!(mb, vec![1, 2, 3]);
        assert!(u.is_parameter(3));
    }
}
