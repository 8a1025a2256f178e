//! Helpers assembling engine systems from rings and maps.

use std::sync::Arc;

use crate::engine::{Block, Component, Equation, System};
use crate::expr::{konst, subst, unknown, E};
use crate::field::Field;
use crate::germs::{LocalRingPresentation, Ring};
use crate::ideal::IdealJet;
use crate::jet::Jet;
use crate::vars::{Monomial, MonomialIndex, VariableSet};

pub(crate) struct Builder {
    pub field: Field,
    pub blocks: Vec<Block>,
    pub equations: Vec<Equation>,
}

/// Monomials of degree `lo..=hi` in `n` variables satisfying `keep`.
pub(crate) fn monomials(n: usize, lo: u32, hi: u32, keep: impl Fn(&Monomial) -> bool) -> Vec<Monomial> {
    MonomialIndex::get(n, hi).monomials.iter().filter(|m| m.degree() >= lo && keep(m)).cloned().collect()
}

impl Builder {
    pub fn new(field: Field) -> Builder {
        Builder { field, blocks: Vec::new(), equations: Vec::new() }
    }

    pub fn finish(self) -> System {
        System { field: self.field, blocks: self.blocks, equations: self.equations }
    }

    /// A block of jets over `vars`; `supports[k]` lists the unknown
    /// monomials of component `k`.
    pub fn block(
        &mut self,
        name: &str,
        vars: &Arc<VariableSet>,
        labels: Vec<String>,
        values: Vec<Jet>,
        supports: Vec<Vec<Monomial>>,
        linear: Option<Vec<usize>>,
    ) -> usize {
        let components = labels
            .into_iter()
            .zip(values)
            .zip(supports)
            .map(|((label, value), support)| Component { label, support, value })
            .collect();
        self.blocks.push(Block { name: name.to_string(), vars: vars.clone(), components, linear });
        self.blocks.len() - 1
    }

    /// Substitution images for the variables of `ring` where the free
    /// variables are the components of block `b`, in order, and
    /// parameters are `param_image`.
    pub fn automorphism_images(&self, b: usize, ring: &LocalRingPresentation, param_image: &dyn Fn(usize) -> E) -> Vec<E> {
        let mut k = 0;
        (0..ring.nvars())
            .map(|i| {
                if ring.vars().is_parameter(i) {
                    param_image(i)
                } else {
                    k += 1;
                    unknown(b, k - 1)
                }
            })
            .collect()
    }

    pub fn equation(&mut self, label: String, expr: E, ideal: Arc<IdealJet>, bound: u32) {
        self.equations.push(Equation { label, expr, ideal, bound });
    }

    /// `q(images) ∈ ideal` for every generator `q` of `ring`'s ideal.
    pub fn preserve_ideal(&mut self, label: &str, ring: &Ring, images: &[E], ideal: &Arc<IdealJet>, bound: u32) {
        for (i, q) in ring.ideal().generators().iter().enumerate() {
            self.equation(format!("{label}[{i}]"), subst(konst(q.clone()), images.to_vec()), ideal.clone(), bound);
        }
    }
}

/// Constant images `var_i` of a ring, as expressions.
pub(crate) fn identity_images(ring: &LocalRingPresentation) -> Vec<E> {
    ring.identity_images().into_iter().map(konst).collect()
}

/// The ideal of a ring, shared.
pub(crate) fn ring_ideal(ring: &LocalRingPresentation) -> Arc<IdealJet> {
    Arc::new(ring.ideal().clone())
}

/// `ideal + J` of a ring from extra generators in that ring.
pub(crate) fn ideal_with(ring: &LocalRingPresentation, extra: &[Jet]) -> Arc<IdealJet> {
    let mut g = ring.ideal().generators().to_vec();
    g.extend(extra.iter().cloned());
    Arc::new(IdealJet::new(ring.vars(), ring.field(), ring.trunc(), g).expect("generators live in the ring"))
}

/// Labels `name.var` for the free variables of a ring.
pub(crate) fn free_labels(name: &str, ring: &LocalRingPresentation) -> Vec<String> {
    ring.free_indices().into_iter().map(|i| format!("{name}.{}", ring.vars().name(i))).collect()
}
