//! Exact sparse Gauss-Jordan elimination.

use std::collections::BTreeMap;

use crate::field::{Field, Scalar};

/// Sparse row: `(column, value)` pairs sorted by column, no zero values.
pub type SparseRow = Vec<(usize, Scalar)>;

/// `a - s * b`.
pub fn axpy(a: &SparseRow, s: &Scalar, b: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map(|e| e.0).unwrap_or(usize::MAX);
        let cb = b.get(j).map(|e| e.0).unwrap_or(usize::MAX);
        if ca < cb {
            out.push(a[i].clone());
            i += 1;
        } else if cb < ca {
            out.push((cb, -&(s * &b[j].1)));
            j += 1;
        } else {
            let v = &a[i].1 - &(s * &b[j].1);
            if !v.is_zero() {
                out.push((ca, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn scale_row(r: &SparseRow, s: &Scalar) -> SparseRow {
    r.iter().map(|(c, v)| (*c, v * s)).collect()
}

/// Builds a sparse row from unordered entries, summing duplicates.
pub fn row_from_entries(field: Field, entries: impl IntoIterator<Item = (usize, Scalar)>) -> SparseRow {
    let mut m: BTreeMap<usize, Scalar> = BTreeMap::new();
    for (c, v) in entries {
        let e = m.entry(c).or_insert_with(|| field.zero());
        *e = &*e + &v;
    }
    m.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

/// A row space kept in reduced row echelon form. Each row's pivot is its
/// leftmost (smallest) column, normalized to one, and no other row has an
/// entry in a pivot column.
#[derive(Clone, Debug)]
pub struct Echelon {
    field: Field,
    rows: BTreeMap<usize, SparseRow>,
}

impl Echelon {
    pub fn new(field: Field) -> Echelon {
        Echelon { field, rows: BTreeMap::new() }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn is_pivot(&self, c: usize) -> bool {
        self.rows.contains_key(&c)
    }

    pub fn row(&self, pivot: usize) -> Option<&SparseRow> {
        self.rows.get(&pivot)
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &SparseRow)> + '_ {
        self.rows.iter().map(|(k, v)| (*k, v))
    }

    /// The unique representative of `row` modulo the row space with no
    /// entries in pivot columns.
    pub fn reduce(&self, row: &SparseRow) -> SparseRow {
        let mut r = row.clone();
        // Rows carry no foreign pivot columns, so the pivot-column entries
        // of `row` are never disturbed and one pass suffices.
        for (c, v) in row {
            if let Some(p) = self.rows.get(c) {
                r = axpy(&r, v, p);
            }
        }
        r
    }

    pub fn contains(&self, row: &SparseRow) -> bool {
        self.reduce(row).is_empty()
    }

    /// Adds a row; returns its pivot column when it was independent.
    pub fn insert(&mut self, row: &SparseRow) -> Option<usize> {
        let r = self.reduce(row);
        let (p, lead) = r.first().cloned()?;
        let r = scale_row(&r, &lead.inv().expect("nonzero pivot"));
        for other in self.rows.values_mut() {
            if let Some(e) = other.iter().find(|e| e.0 == p) {
                let c = e.1.clone();
                *other = axpy(other, &c, &r);
            }
        }
        self.rows.insert(p, r);
        Some(p)
    }

    /// Basis of the null space `{x : row . x = 0 for all rows}` in `ncols`
    /// coordinates, one vector per free column.
    pub fn kernel(&self, ncols: usize) -> Vec<SparseRow> {
        let mut by_free: BTreeMap<usize, Vec<(usize, Scalar)>> = BTreeMap::new();
        for (&p, r) in &self.rows {
            for (c, v) in r.iter().skip(1) {
                by_free.entry(*c).or_default().push((p, -v));
            }
        }
        (0..ncols)
            .filter(|c| !self.rows.contains_key(c))
            .map(|f| {
                let mut v = by_free.remove(&f).unwrap_or_default();
                v.push((f, self.field.one()));
                v.sort_by_key(|e| e.0);
                v
            })
            .collect()
    }
}

/// Result of an exact linear solve.
#[derive(Clone, Debug)]
pub struct LinearSolution {
    /// Values with every free column set to zero.
    pub values: Vec<Scalar>,
    pub rank: usize,
    /// Indices of equations found inconsistent with the ones before them.
    pub inconsistent: Vec<usize>,
}

impl LinearSolution {
    pub fn is_consistent(&self) -> bool {
        self.inconsistent.is_empty()
    }
}

/// Solves `row_i . x = rhs_i` over `ncols` unknowns. Inconsistent
/// equations are skipped and reported; the rest are solved with free
/// columns set to zero.
pub fn solve(field: Field, ncols: usize, equations: &[(SparseRow, Scalar)]) -> LinearSolution {
    let mut ech = Echelon::new(field);
    let mut inconsistent = Vec::new();
    for (i, (row, rhs)) in equations.iter().enumerate() {
        let mut aug = row.clone();
        debug_assert!(aug.iter().all(|e| e.0 < ncols));
        if !rhs.is_zero() {
            aug.push((ncols, rhs.clone()));
        }
        let r = ech.reduce(&aug);
        match r.first() {
            None => {}
            Some((c, _)) if *c == ncols => inconsistent.push(i),
            Some(_) => {
                ech.insert(&r);
            }
        }
    }
    let mut values = vec![field.zero(); ncols];
    for (p, r) in ech.rows() {
        if let Some((c, v)) = r.last() {
            if *c == ncols {
                values[p] = v.clone();
            }
        }
    }
    LinearSolution { values, rank: ech.rank(), inconsistent }
}

/// Inverse of a dense square matrix, or `None` when singular.
pub fn invert_matrix(field: Field, m: &[Vec<Scalar>]) -> Option<Vec<Vec<Scalar>>> {
    let n = m.len();
    let mut a: Vec<Vec<Scalar>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { field.one() } else { field.zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].inv()?;
        for v in a[col].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..2 * n {
                    let s = &a[r][c] - &(&f * &a[col][c]);
                    a[r][c] = s;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn is_invertible(field: Field, m: &[Vec<Scalar>]) -> bool {
    invert_matrix(field, m).is_some()
}
