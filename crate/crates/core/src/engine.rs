//! Order-by-order solving of jet equation systems.
//!
//! Unknowns are jets whose coefficients on a declared monomial support are
//! columns. Stage `r` activates the columns of degree `<= r` and drives
//! every equation to zero modulo its ideal and `m^(min(bound, r)+1)` by
//! Newton steps on the exact linearization; free columns of each linear
//! system are left unchanged (zero step). Columns of invertible linear
//! parts are fixed beforehand.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::expr::{Evaluator, Unknowns, E};
use crate::field::{Field, Scalar};
use crate::ideal::IdealJet;
use crate::jet::Jet;
use crate::linalg::{invert_matrix, solve, SparseRow};
use crate::vars::{Monomial, VariableSet};

/// One unknown jet of a block.
#[derive(Clone, Debug)]
pub struct Component {
    pub label: String,
    /// Monomials whose coefficients are unknown.
    pub support: Vec<Monomial>,
    /// Starting value; coefficients off the support stay as given.
    pub value: Jet,
}

/// A family of unknown jets over one ring.
#[derive(Clone, Debug)]
pub struct Block {
    pub name: String,
    pub vars: Arc<VariableSet>,
    pub components: Vec<Component>,
    /// Variables whose linear coefficients form an invertible matrix fixed
    /// before the stage loop (one row per component).
    pub linear: Option<Vec<usize>>,
}

impl Block {
    /// True for the coefficient of a linear monomial in the fixed matrix.
    pub fn is_linear_column(&self, m: &Monomial) -> bool {
        match &self.linear {
            Some(vs) => m.degree() == 1 && vs.iter().any(|&v| m.exponent(v) == 1),
            None => false,
        }
    }

    /// The fixed linear matrix of the current values.
    pub fn linear_matrix(&self, values: &[Jet]) -> Option<Vec<Vec<Scalar>>> {
        let vs = self.linear.as_ref()?;
        let n = self.vars.len();
        Some(values.iter().map(|v| vs.iter().map(|&j| v.coeff(&Monomial::var(n, j))).collect()).collect())
    }
}

/// `expr ∈ ideal + m^(bound+1)`.
#[derive(Clone, Debug)]
pub struct Equation {
    pub label: String,
    pub expr: E,
    pub ideal: Arc<IdealJet>,
    pub bound: u32,
}

#[derive(Clone, Debug)]
pub struct System {
    pub field: Field,
    pub blocks: Vec<Block>,
    pub equations: Vec<Equation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageLog {
    pub order: u32,
    pub rows: usize,
    pub columns: usize,
    pub rank: usize,
    pub iterations: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Solved,
    /// Stage `order` could not be satisfied; nonzero equation normal forms.
    Obstructed { order: u32, residual: Vec<(String, Jet)> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Newton,
    Search,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub values: Vec<Vec<Jet>>,
    pub log: Vec<StageLog>,
    pub method: Method,
}

#[derive(Clone, Debug)]
struct Column {
    block: usize,
    component: usize,
    mono: Monomial,
    fixed: bool,
}

struct State<'a> {
    system: &'a System,
    columns: Vec<Column>,
    by_component: Vec<Vec<Vec<usize>>>,
    values: Vec<Vec<Jet>>,
    stage: u32,
}

impl Unknowns for State<'_> {
    fn value(&self, block: usize, component: usize, r: u32) -> Jet {
        self.values[block][component].retrunc(r)
    }

    fn columns(&self, block: usize, component: usize, r: u32) -> Vec<(usize, Jet)> {
        let vars = &self.system.blocks[block].vars;
        let field = self.system.field;
        self.by_component[block][component]
            .iter()
            .filter(|&&c| !self.columns[c].fixed && self.columns[c].mono.degree() <= self.stage)
            .map(|&c| (c, Jet::monomial(vars, field, r, self.columns[c].mono.clone(), field.one())))
            .collect()
    }
}

impl<'a> State<'a> {
    fn new(system: &'a System) -> State<'a> {
        let mut columns = Vec::new();
        let mut by_component = Vec::new();
        for (b, blk) in system.blocks.iter().enumerate() {
            let mut per = Vec::new();
            for (k, comp) in blk.components.iter().enumerate() {
                let mut support = comp.support.clone();
                support.sort_by(|a, b| b.cmp(a));
                support.dedup();
                let mut ids = Vec::new();
                for m in support {
                    ids.push(columns.len());
                    let fixed = blk.is_linear_column(&m);
                    columns.push(Column { block: b, component: k, mono: m, fixed });
                }
                per.push(ids);
            }
            by_component.push(per);
        }
        let values = system.blocks.iter().map(|b| b.components.iter().map(|c| c.value.clone()).collect()).collect();
        State { system, columns, by_component, values, stage: 0 }
    }

    fn max_stage(&self) -> u32 {
        self.system.equations.iter().map(|e| e.bound).max().unwrap_or(0)
    }

    /// Normal forms of all equations at stage `r`, without tangents.
    fn residual(&self, r: u32) -> Vec<(String, Jet)> {
        let mut ev = Evaluator::new(self, r, false);
        let mut out = Vec::new();
        for eq in &self.system.equations {
            if eq.bound == 0 {
                continue;
            }
            let level = eq.bound.min(r);
            let d = ev.eval(&eq.expr);
            let nf = eq.ideal.normal_form_row(&d.value, level);
            if !nf.is_empty() {
                out.push((eq.label.clone(), eq.ideal.from_row(&nf, level)));
            }
        }
        out
    }

    /// One Newton step at stage `r`. Returns `(residual was zero, step
    /// taken, log)`; `None` when the linear system is inconsistent.
    fn newton_step(&mut self, r: u32) -> (bool, Option<bool>, StageLog) {
        let field = self.system.field;
        let mut rows: BTreeMap<(usize, usize), (SparseRow, Scalar)> = BTreeMap::new();
        let mut zero = true;
        {
            let mut ev = Evaluator::new(&*self, r, true);
            for (i, eq) in self.system.equations.iter().enumerate() {
                if eq.bound == 0 {
                    continue;
                }
                let level = eq.bound.min(r);
                let d = ev.eval(&eq.expr);
                for (mcol, v) in eq.ideal.normal_form_row(&d.value, level) {
                    zero = false;
                    rows.entry((i, mcol)).or_insert_with(|| (Vec::new(), field.zero())).1 = -&v;
                }
                for (c, t) in &d.tan {
                    for (mcol, v) in eq.ideal.normal_form_row(t, level) {
                        rows.entry((i, mcol)).or_insert_with(|| (Vec::new(), field.zero())).0.push((*c, v));
                    }
                }
            }
        }
        let active = self.columns.iter().filter(|c| !c.fixed && c.mono.degree() <= r).count();
        let eqs: Vec<(SparseRow, Scalar)> = rows.into_values().collect();
        let mut log = StageLog { order: r, rows: eqs.len(), columns: active, rank: 0, iterations: 0 };
        if zero {
            return (true, Some(false), log);
        }
        let sol = solve(field, self.columns.len(), &eqs);
        log.rank = sol.rank;
        if !sol.is_consistent() {
            return (false, None, log);
        }
        let mut moved = false;
        for (c, v) in sol.values.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            moved = true;
            let col = &self.columns[c];
            let j = &mut self.values[col.block][col.component];
            let cur = j.coeff(&col.mono);
            j.set_coeff(&col.mono, &cur + v);
        }
        (false, Some(moved), log)
    }
}

const MAX_NEWTON: u32 = 8;

/// Newton stage loop from the blocks' starting values.
pub fn solve_newton(system: &System) -> Outcome {
    let mut st = State::new(system);
    let mut log = Vec::new();
    for r in 1..=st.max_stage() {
        st.stage = r;
        let mut ok = false;
        let mut last = StageLog { order: r, rows: 0, columns: 0, rank: 0, iterations: 0 };
        for it in 0..MAX_NEWTON {
            let (zero, step, l) = st.newton_step(r);
            if zero {
                // the residual vanished: keep the step that solved the stage
                last = if it == 0 { StageLog { iterations: 1, ..l } } else { StageLog { iterations: it + 1, ..last } };
                ok = true;
                break;
            }
            last = StageLog { iterations: it + 1, ..l };
            match step {
                Some(true) => continue,
                _ => break,
            }
        }
        log.push(last);
        if !ok {
            let residual = st.residual(r);
            return Outcome {
                status: Status::Obstructed { order: r, residual },
                values: st.values,
                log,
                method: Method::Newton,
            };
        }
    }
    Outcome { status: Status::Solved, values: st.values, log, method: Method::Newton }
}

/// Limits of the exhaustive search over finite fields.
#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    /// Largest number of assignments tried at one stage.
    pub per_stage: u64,
    /// Largest total number of evaluated assignments.
    pub total: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { per_stage: 4096, total: 400_000 }
    }
}

/// Result of [`search`]: solved, exhausted (no solution exists), or gave
/// up at the limits.
#[derive(Clone, Debug)]
pub enum SearchResult {
    Found(Outcome),
    /// `deepest` is the last fully solved stage; `residual` comes from the
    /// first assignment failing one stage beyond it.
    Exhausted { deepest: u32, residual: Vec<(String, Jet)> },
    Abandoned,
}

/// Depth-first search over all coefficient values, degree by degree, for
/// finite fields. Complete within the limits: `Exhausted` means no
/// assignment of the supported coefficients solves the system.
pub fn search(system: &System, limits: SearchLimits) -> SearchResult {
    let Field::Prime(p) = system.field else {
        return SearchResult::Abandoned;
    };
    let mut st = State::new(system);
    let max = st.max_stage();
    let mut by_degree: Vec<Vec<usize>> = vec![Vec::new(); max as usize + 1];
    for (i, c) in st.columns.iter().enumerate() {
        let d = c.mono.degree();
        if d >= 1 && d <= max {
            by_degree[d as usize].push(i);
        }
    }
    for cols in &by_degree {
        let count = (p as f64).powi(cols.len() as i32);
        if count > limits.per_stage as f64 {
            return SearchResult::Abandoned;
        }
    }
    let mut budget = limits.total;
    let mut deepest = (0, Vec::new());
    match dfs(&mut st, &by_degree, 1, max, p, &mut budget, &mut deepest) {
        Some(true) => SearchResult::Found(Outcome {
            status: Status::Solved,
            values: st.values,
            log: Vec::new(),
            method: Method::Search,
        }),
        Some(false) => SearchResult::Exhausted { deepest: deepest.0, residual: deepest.1 },
        None => SearchResult::Abandoned,
    }
}

fn dfs(
    st: &mut State<'_>,
    by_degree: &[Vec<usize>],
    r: u32,
    max: u32,
    p: u64,
    budget: &mut u64,
    deepest: &mut (u32, Vec<(String, Jet)>),
) -> Option<bool> {
    if r > max {
        return Some(true);
    }
    let field = st.system.field;
    let cols = by_degree[r as usize].clone();
    let total = p.pow(cols.len() as u32);
    for code in 0..total {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        let mut rest = code;
        for &c in &cols {
            let v = field.from_i64((rest % p) as i64);
            rest /= p;
            let col = st.columns[c].clone();
            st.values[col.block][col.component].set_coeff(&col.mono, v);
        }
        if r == 1 && !linear_parts_invertible(st) {
            continue;
        }
        st.stage = r;
        let res = st.residual(r);
        if !res.is_empty() {
            if r > deepest.0 && deepest.1.is_empty() {
                deepest.1 = res;
            }
            continue;
        }
        if r > deepest.0 {
            *deepest = (r, Vec::new());
        }
        match dfs(st, by_degree, r + 1, max, p, budget, deepest) {
            Some(true) => return Some(true),
            Some(false) => {}
            None => return None,
        }
    }
    Some(false)
}

fn linear_parts_invertible(st: &State<'_>) -> bool {
    st.system.blocks.iter().enumerate().all(|(b, blk)| match blk.linear_matrix(&st.values[b]) {
        Some(m) => invert_matrix(st.system.field, &m).is_some(),
        None => true,
    })
}

/// Normal forms of every equation at the full bound for given values.
pub fn residual_of(system: &System, values: &[Vec<Jet>]) -> Vec<(String, Jet)> {
    let mut st = State::new(system);
    st.values = values.to_vec();
    let r = st.max_stage();
    st.stage = r;
    st.residual(r)
}

/// The first-order variation of each equation at the given values with
/// every non-fixed column active, at stage `r`: for each equation the
/// normal form of the value and of the derivative in each column.
pub fn linearize(system: &System, values: &[Vec<Jet>], r: u32) -> Linearization {
    let mut st = State::new(system);
    st.values = values.to_vec();
    st.stage = r;
    for c in st.columns.iter_mut() {
        c.fixed = false;
    }
    let columns = st.columns.iter().map(|c| (c.block, c.component, c.mono.clone())).collect();
    let mut ev = Evaluator::new(&st, r, true);
    let mut eqs = Vec::new();
    for eq in &system.equations {
        let level = eq.bound.min(r);
        let d = ev.eval(&eq.expr);
        let tan = d
            .tan
            .iter()
            .map(|(c, t)| (*c, eq.ideal.normal_form_row(&t.retrunc(level), level)))
            .filter(|(_, row)| !row.is_empty())
            .collect();
        eqs.push(LinearizedEquation { value: eq.ideal.normal_form_row(&d.value, level), tan, level });
    }
    Linearization { columns, equations: eqs }
}

#[derive(Clone, Debug)]
pub struct LinearizedEquation {
    pub value: SparseRow,
    /// `(column, normal form of the derivative)`.
    pub tan: Vec<(usize, SparseRow)>,
    pub level: u32,
}

#[derive(Clone, Debug)]
pub struct Linearization {
    /// `(block, component, monomial)` per column.
    pub columns: Vec<(usize, usize, Monomial)>,
    pub equations: Vec<LinearizedEquation>,
}
