//! Jet expressions in unknown coefficient blocks, evaluated together with
//! their first-order variation in a chosen set of coefficient columns.

use std::collections::HashMap;
use std::sync::Arc;

use crate::jet::{Jet, PowerCache};

/// An expression whose value is a jet in some ring. Unknowns are jet
/// components of [`Block`](crate::engine::Block)s.
#[derive(Debug)]
pub enum Expr {
    Const(Jet),
    Unknown { block: usize, component: usize },
    Add(Vec<E>),
    Neg(E),
    Mul(E, E),
    /// `inner` with variable `i` replaced by `images[i]`; images lie in
    /// the maximal ideal of a common ring.
    Subst { inner: E, images: Vec<E> },
}

pub type E = Arc<Expr>;

pub fn konst(j: Jet) -> E {
    Arc::new(Expr::Const(j))
}

pub fn unknown(block: usize, component: usize) -> E {
    Arc::new(Expr::Unknown { block, component })
}

pub fn add(terms: Vec<E>) -> E {
    Arc::new(Expr::Add(terms))
}

pub fn sub(a: E, b: E) -> E {
    add(vec![a, neg(b)])
}

pub fn neg(a: E) -> E {
    Arc::new(Expr::Neg(a))
}

pub fn mul(a: E, b: E) -> E {
    Arc::new(Expr::Mul(a, b))
}

pub fn subst(inner: E, images: Vec<E>) -> E {
    Arc::new(Expr::Subst { inner, images })
}

/// A value with its partial derivatives in the active columns, sorted by
/// column.
#[derive(Clone, Debug)]
pub struct Dual {
    pub value: Jet,
    pub tan: Vec<(usize, Jet)>,
}

impl Dual {
    pub fn constant(value: Jet) -> Dual {
        Dual { value, tan: Vec::new() }
    }
}

/// Current unknown values and the active columns per component.
pub trait Unknowns {
    /// Value of a component at truncation `r`.
    fn value(&self, block: usize, component: usize, r: u32) -> Jet;
    /// Active columns of a component with their monomial jets at `r`.
    fn columns(&self, block: usize, component: usize, r: u32) -> Vec<(usize, Jet)>;
}

/// Evaluates expressions at truncation `r`, memoizing shared nodes.
pub struct Evaluator<'a, U: Unknowns> {
    unknowns: &'a U,
    r: u32,
    with_tangents: bool,
    cache: HashMap<*const Expr, Arc<Dual>>,
}

impl<'a, U: Unknowns> Evaluator<'a, U> {
    pub fn new(unknowns: &'a U, r: u32, with_tangents: bool) -> Self {
        Evaluator { unknowns, r, with_tangents, cache: HashMap::new() }
    }

    pub fn eval(&mut self, e: &E) -> Arc<Dual> {
        let key = Arc::as_ptr(e);
        if let Some(d) = self.cache.get(&key) {
            return d.clone();
        }
        let d = Arc::new(self.compute(e));
        self.cache.insert(key, d.clone());
        d
    }

    fn compute(&mut self, e: &E) -> Dual {
        let r = self.r;
        match &**e {
            Expr::Const(j) => Dual::constant(j.retrunc(r)),
            Expr::Unknown { block, component } => Dual {
                value: self.unknowns.value(*block, *component, r),
                tan: if self.with_tangents { self.unknowns.columns(*block, *component, r) } else { Vec::new() },
            },
            Expr::Add(terms) => {
                let parts: Vec<Arc<Dual>> = terms.iter().map(|t| self.eval(t)).collect();
                let mut value = parts[0].value.clone();
                for p in &parts[1..] {
                    value.add_assign(&p.value);
                }
                let mut tan = Vec::new();
                for p in &parts {
                    tan = merge(tan, p.tan.iter().cloned());
                }
                Dual { value, tan }
            }
            Expr::Neg(a) => {
                let a = self.eval(a);
                Dual { value: -&a.value, tan: a.tan.iter().map(|(c, t)| (*c, -t)).collect() }
            }
            Expr::Mul(a, b) => {
                let a = self.eval(a);
                let b = self.eval(b);
                let value = &a.value * &b.value;
                let ta = a.tan.iter().map(|(c, t)| (*c, t * &b.value));
                let tb: Vec<(usize, Jet)> = b.tan.iter().map(|(c, t)| (*c, &a.value * t)).collect();
                let tan = merge(ta.collect(), tb);
                Dual { value, tan }
            }
            Expr::Subst { inner, images } => {
                let inner = self.eval(inner);
                let ims: Vec<Arc<Dual>> = images.iter().map(|i| self.eval(i)).collect();
                let vals: Vec<Jet> = ims.iter().map(|d| d.value.clone()).collect();
                let mut cache = PowerCache::new(&vals);
                let value = inner.value.substitute_with(&mut cache);
                let mut tan: Vec<(usize, Jet)> =
                    inner.tan.iter().map(|(c, t)| (*c, t.substitute_with(&mut cache))).collect();
                for (i, im) in ims.iter().enumerate() {
                    if im.tan.is_empty() {
                        continue;
                    }
                    let d = inner.value.derivative(i);
                    if d.is_zero() {
                        continue;
                    }
                    let di = d.substitute_with(&mut cache);
                    tan = merge(tan, im.tan.iter().map(|(c, t)| (*c, &di * t)));
                }
                Dual { value, tan }
            }
        }
    }
}

/// Sums two sorted tangent lists.
fn merge(a: Vec<(usize, Jet)>, b: impl IntoIterator<Item = (usize, Jet)>) -> Vec<(usize, Jet)> {
    let mut b: Vec<(usize, Jet)> = b.into_iter().collect();
    if a.is_empty() {
        b.retain(|(_, t)| !t.is_zero());
        return b;
    }
    if b.is_empty() {
        return a;
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut ia = a.into_iter().peekable();
    let mut ib = b.into_iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (Some((ca, _)), Some((cb, _))) => {
                if ca < cb {
                    out.push(ia.next().unwrap());
                } else if cb < ca {
                    out.push(ib.next().unwrap());
                } else {
                    let (c, mut x) = ia.next().unwrap();
                    let (_, y) = ib.next().unwrap();
                    x.add_assign(&y);
                    if !x.is_zero() {
                        out.push((c, x));
                    }
                }
            }
            (Some(_), None) => out.push(ia.next().unwrap()),
            (None, Some(_)) => out.push(ib.next().unwrap()),
            (None, None) => break,
        }
    }
    out.retain(|(_, t)| !t.is_zero());
    out
}
