//! Exhaustive orbits of univariate jets `a_1 x + … + a_D x^D` over small
//! prime fields, by enumeration of every group jet. Plain coefficient
//! vectors, independent of the library.

use std::collections::HashSet;

pub type Poly = Vec<u64>;

pub fn mul(a: &Poly, b: &Poly, p: u64, d: usize) -> Poly {
    let mut out = vec![0; d + 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(d + 1 - i) {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

/// `f(g)` for `g(0) = 0`.
pub fn compose(f: &Poly, g: &Poly, p: u64, d: usize) -> Poly {
    let mut out = vec![0; d + 1];
    let mut power = vec![0; d + 1];
    power[0] = 1;
    for c in f.iter() {
        for k in 0..=d {
            out[k] = (out[k] + c * power[k]) % p;
        }
        power = mul(&power, g, p, d);
    }
    out
}

/// All coefficient vectors of length `d + 1` vanishing below degree `lo`.
pub fn all_polys(p: u64, d: usize, lo: usize) -> Vec<Poly> {
    let mut out = vec![vec![0; d + 1]];
    for k in lo..=d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..p).map(move |c| {
                    let mut w = v.clone();
                    w[k] = c;
                    w
                })
            })
            .collect();
    }
    out
}

/// Lowest nonzero degree.
pub fn order(f: &Poly) -> Option<usize> {
    f.iter().position(|c| *c != 0)
}

fn substitutions(p: u64, d: usize) -> Vec<Poly> {
    all_polys(p, d, 1).into_iter().filter(|g| g[1] != 0).collect()
}

/// `{f∘ψ}` over all invertible `ψ`.
pub fn right_orbit(f: &Poly, p: u64, d: usize) -> HashSet<Poly> {
    substitutions(p, d).iter().map(|psi| compose(f, psi, p, d)).collect()
}

/// `{C(x, f∘ψ(x))}` over all invertible `ψ` and all contact jets
/// `C(x, y) = Σ c_ij x^i y^j` with `j ≥ 1`, `i + j ≤ d`, `c_01 ≠ 0`.
pub fn contact_orbit(f: &Poly, p: u64, d: usize) -> HashSet<Poly> {
    let slots: Vec<(usize, usize)> =
        (1..=d).flat_map(|j| (0..=d - j).map(move |i| (i, j))).collect();
    let mut cs: Vec<Vec<u64>> = vec![Vec::new()];
    for (i, j) in &slots {
        let lo = if (*i, *j) == (0, 1) { 1 } else { 0 };
        cs = cs.into_iter().flat_map(|v| (lo..p).map(move |c| [v.clone(), vec![c]].concat())).collect();
    }
    let mut out = HashSet::new();
    for psi in substitutions(p, d) {
        let g = compose(f, &psi, p, d);
        let mut g_pow = vec![vec![0; d + 1]; d + 1];
        g_pow[0][0] = 1;
        for j in 1..=d {
            g_pow[j] = mul(&g_pow[j - 1], &g, p, d);
        }
        // x^i g^j
        let terms: Vec<Poly> = slots
            .iter()
            .map(|(i, j)| {
                let mut t = vec![0; d + 1];
                for k in 0..=d - i {
                    t[k + i] = g_pow[*j][k];
                }
                t
            })
            .collect();
        for c in &cs {
            let mut acc = vec![0; d + 1];
            for (ci, t) in c.iter().zip(&terms) {
                if *ci != 0 {
                    for k in 0..=d {
                        acc[k] = (acc[k] + ci * t[k]) % p;
                    }
                }
            }
            out.insert(acc);
        }
    }
    out
}

/// Text form `a_1 x + a_2 x^2 + …` with integer coefficients.
pub fn text(f: &Poly) -> String {
    let terms: Vec<String> = f.iter().enumerate().filter(|(_, c)| **c != 0).map(|(k, c)| format!("{c} x^{k}")).collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}
