//! Tangent images of group orbits at jet scale and the finite
//! determinacy test `m^(k+1)·θ(f) ⊆ T(𝒢, f) + m^(D+1)`.

use crate::build::monomials;
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::germs::{GermMap, LocalRingPresentation};
use crate::groups::{ContactElem, GroupTag};
use crate::jet::Jet;
use crate::linalg::{row_from_entries, Echelon, SparseRow};
use crate::vars::{Monomial, MonomialIndex};

/// Basis of the vector fields `v = Σ_{i ∈ directions} v_i ∂_i` with every
/// `v_i` supported on monomials of degree `≥ lo` accepted by `keep`, and
/// `v(J) ⊆ J` mod `m^(D+1)`. Fields are indexed by all variables.
pub fn logarithmic_fields(
    ring: &LocalRingPresentation,
    lo: u32,
    directions: &[usize],
    keep: impl Fn(&Monomial) -> bool,
) -> Vec<Vec<Jet>> {
    let field = ring.field();
    let d = ring.trunc();
    let monos = monomials(ring.nvars(), lo, d, keep);
    let columns: Vec<(usize, Monomial)> =
        directions.iter().flat_map(|&i| monos.iter().map(move |m| (i, m.clone()))).collect();
    let gens = ring.ideal().generators();
    let width = ring.ideal().monomial_index().len();
    let offset = width * gens.len();
    let mut ech = Echelon::new(field);
    for (c, (i, m)) in columns.iter().enumerate() {
        let mut entries: Vec<(usize, Scalar)> = Vec::new();
        for (g, q) in gens.iter().enumerate() {
            let dq = q.derivative(*i).mul_monomial(m);
            for (col, v) in ring.ideal().normal_form_row(&dq, d) {
                entries.push((g * width + col, v));
            }
        }
        entries.push((offset + c, field.one()));
        ech.insert(&row_from_entries(field, entries));
    }
    ech.rows()
        .filter(|(p, _)| *p >= offset)
        .map(|(_, row)| {
            let mut v = vec![ring.zero(); ring.nvars()];
            for (c, s) in row {
                let (i, m) = &columns[c - offset];
                v[*i].add_term(m.clone(), s.clone());
            }
            v
        })
        .collect()
}

/// `Σ v_i ∂_i p`.
pub fn apply_field(v: &[Jet], p: &Jet) -> Jet {
    let mut out = Jet::zero(p.vars(), p.field(), p.trunc());
    for (i, vi) in v.iter().enumerate() {
        if vi.is_zero() {
            continue;
        }
        let d = p.derivative(i);
        if !d.is_zero() {
            out.add_assign(&(&d * vi));
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct TangentReport {
    pub group: GroupTag,
    pub order: u32,
    /// Echelon basis of `T(𝒢, f)` modulo `J_X + m^(D+1)`, as map tuples.
    pub basis: Vec<Vec<Jet>>,
    /// The basis vectors lying in the degree `≤ order` slice.
    pub slice_basis: Vec<Vec<Jet>>,
    /// Dimension of `m·θ(f)` modulo `J_X + m^(D+1)`.
    pub ambient_dimension: usize,
    /// `m^(order+1)·θ(f) ⊆ T(𝒢, f) + m^(D+1)`.
    pub determined: bool,
    /// Monomial vectors of `m^(order+1)·θ(f)` outside the tangent image.
    pub missing: Vec<Vec<Jet>>,
}

impl TangentReport {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Coordinates of map tuples: column `index(monomial)·m + j`, so that the
/// low-degree slices are column tails.
struct Coords<'a> {
    source: &'a LocalRingPresentation,
    index: std::sync::Arc<MonomialIndex>,
    m: usize,
}

impl Coords<'_> {
    fn row(&self, comps: &[Jet]) -> SparseRow {
        let d = self.source.trunc();
        let field = self.source.field();
        let mut entries = Vec::new();
        for (j, c) in comps.iter().enumerate() {
            for (col, v) in self.source.ideal().normal_form_row(c, d) {
                entries.push((col * self.m + j, v));
            }
        }
        row_from_entries(field, entries)
    }

    fn tuple(&self, row: &SparseRow) -> Vec<Jet> {
        let mut out = vec![self.source.zero(); self.m];
        for (c, v) in row {
            out[c % self.m].add_term(self.index.monomials[c / self.m].clone(), v.clone());
        }
        out
    }

    fn degree(&self, col: usize) -> u32 {
        self.index.monomials[col / self.m].degree()
    }
}

/// Tangent image of the orbit of `f` and the determinacy verdict at
/// order `k`.
pub fn tangent_space(group: GroupTag, f: &GermMap, k: u32) -> Result<TangentReport> {
    let x = f.source();
    let y = f.target();
    let d = x.trunc();
    if k + 1 > d {
        return Err(Error::Domain(format!("truncation {d} too small for order {k}")));
    }
    if matches!(group, GroupTag::L | GroupTag::LR) && !y.is_smooth() {
        return Err(Error::Unsupported("tangent images of left actions need a smooth target".into()));
    }
    let m = y.free_indices().len();
    let coords = Coords { source: x, index: MonomialIndex::get(x.nvars(), d), m };
    let mut ech = Echelon::new(x.field());
    let comps = f.components();
    if group.acts_on_source() {
        for v in logarithmic_fields(x, 1, &x.free_indices(), |_| true) {
            let t: Vec<Jet> = comps.iter().map(|c| apply_field(&v, c)).collect();
            ech.insert(&coords.row(&t));
        }
    }
    if matches!(group, GroupTag::L | GroupTag::LR) {
        let images = f.images();
        for j in 0..m {
            for mono in monomials(y.nvars(), 1, d, |_| true) {
                let eta = Jet::monomial(y.vars(), y.field(), d, mono, y.field().one());
                let mut t = vec![x.zero(); m];
                t[j] = eta.substitute(&images)?;
                ech.insert(&coords.row(&t));
            }
        }
    }
    if matches!(group, GroupTag::C | GroupTag::K) {
        let id = ContactElem::identity(x, y)?;
        let p = id.product().clone();
        let ys = id.y_indices();
        let images = id.product_images(&x.identity_images(), comps);
        let keep = |mono: &Monomial| ys.iter().any(|&i| mono.exponent(i) > 0);
        for v in logarithmic_fields(&p, 1, &ys, keep) {
            let t: Vec<Jet> = ys.iter().map(|&i| v[i].substitute_unchecked(&images)).collect();
            ech.insert(&coords.row(&t));
        }
    }
    let basis: Vec<Vec<Jet>> = ech.rows().map(|(_, r)| coords.tuple(r)).collect();
    let slice_basis = ech.rows().filter(|(p, _)| coords.degree(*p) <= k).map(|(_, r)| coords.tuple(r)).collect();
    let mut ambient = Echelon::new(x.field());
    let mut missing = Vec::new();
    for mono in monomials(x.nvars(), 1, d, |_| true) {
        for j in 0..m {
            let mut t = vec![x.zero(); m];
            t[j] = Jet::monomial(x.vars(), x.field(), d, mono.clone(), x.field().one());
            let row = coords.row(&t);
            ambient.insert(&row);
            if mono.degree() > k && !row.is_empty() && !ech.contains(&row) {
                missing.push(t);
            }
        }
    }
    Ok(TangentReport {
        group,
        order: k,
        basis,
        slice_basis,
        ambient_dimension: ambient.rank(),
        determined: missing.is_empty(),
        missing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn map(f: &str, d: u32) -> GermMap {
        let q = Field::Rational;
        let x = LocalRingPresentation::parse(&["x"], &[], q, d, &[]).unwrap();
        let y = LocalRingPresentation::parse(&["y"], &[], q, d, &[]).unwrap();
        GermMap::parse(&x, &y, &[f]).unwrap()
    }

    #[test]
    fn contact_tangent_of_a_square_is_m_squared() {
        let r = tangent_space(GroupTag::K, &map("x^2", 4), 2).unwrap();
        assert!(r.determined);
        // m² mod m⁵ is spanned by x², x³, x⁴
        assert_eq!(r.dimension(), 3);
        assert_eq!(r.slice_basis.len(), 1);
    }

    #[test]
    fn zero_map_is_never_determined() {
        for k in 1..4 {
            for tag in GroupTag::ALL {
                assert!(!tangent_space(tag, &map("0", 4), k).unwrap().determined);
            }
        }
    }

    #[test]
    fn submersion_is_right_determined() {
        assert!(tangent_space(GroupTag::R, &map("x", 4), 1).unwrap().determined);
    }

    #[test]
    fn order_must_fit_the_truncation() {
        assert!(tangent_space(GroupTag::R, &map("x", 4), 4).is_err());
    }
}
