//! Full polynomial models of a given total degree over a subset of design
//! coordinates.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolynomialModel {
    pub name: String,
    /// Indices of the coordinates the model depends on.
    pub factor_subset: Vec<usize>,
    pub order: usize,
    /// Exponent tuples over `factor_subset`, graded lexicographic.
    pub basis: Vec<Vec<u32>>,
}

/// All exponent tuples of length `q` with total degree `d`, lexicographically
/// descending (`x1^d` first).
fn tuples_of_degree(q: usize, d: u32) -> Vec<Vec<u32>> {
    if q == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in tuples_of_degree(q - 1, d - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn graded_lex_basis(q: usize, order: usize) -> Vec<Vec<u32>> {
    (0..=order as u32).flat_map(|d| tuples_of_degree(q, d)).collect()
}

/// `C(n, k)` for `k <= n`.
pub fn binomial(n: usize, k: usize) -> usize {
    assert!(k <= n);
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as usize
}

impl PolynomialModel {
    pub fn new(name: &str, factor_subset: Vec<usize>, order: usize) -> Self {
        let basis = graded_lex_basis(factor_subset.len(), order);
        PolynomialModel {
            name: name.to_string(),
            factor_subset,
            order,
            basis,
        }
    }

    /// Model in every one of `q` coordinates.
    pub fn full(name: &str, q: usize, order: usize) -> Self {
        Self::new(name, (0..q).collect(), order)
    }

    pub fn m(&self) -> usize {
        self.basis.len()
    }

    /// Largest coordinate index used, plus one.
    pub fn min_dimension(&self) -> usize {
        self.factor_subset.iter().map(|i| i + 1).max().unwrap_or(0)
    }

    /// Monomial values at `x` (indexed over all coordinates) written into `out`.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.m());
        let k = self.factor_subset.len();
        let d = self.order;
        // powers[j * (d+1) + e] = x_j^e
        let mut powers = vec![1.0; k * (d + 1)];
        for (j, &c) in self.factor_subset.iter().enumerate() {
            for e in 1..=d {
                powers[j * (d + 1) + e] = powers[j * (d + 1) + e - 1] * x[c];
            }
        }
        for (t, exps) in self.basis.iter().enumerate() {
            let mut v = 1.0;
            for (j, &e) in exps.iter().enumerate() {
                if e > 0 {
                    v *= powers[j * (d + 1) + e as usize];
                }
            }
            out[t] = v;
        }
    }

    pub fn basis_eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        self.eval_into(x, &mut out);
        out
    }

    /// Coefficients of `f(x + s·dir)` as a polynomial in `s`:
    /// `out[k][t]` multiplies `s^k` in term `t`, for `k = 0..=order`.
    pub fn eval_line_into(&self, x: &[f64], dir: &[f64], out: &mut [Vec<f64>]) {
        let d = self.order;
        debug_assert_eq!(out.len(), d + 1);
        let k = self.factor_subset.len();
        // line[j][e] = coefficients of (x_j + s dir_j)^e, degree e.
        let mut line = vec![vec![vec![0.0; d + 1]; d + 1]; k];
        for (j, &c) in self.factor_subset.iter().enumerate() {
            line[j][0][0] = 1.0;
            for e in 1..=d {
                for p in 0..=e {
                    let mut v = 0.0;
                    if p < e {
                        v += line[j][e - 1][p] * x[c];
                    }
                    if p > 0 {
                        v += line[j][e - 1][p - 1] * dir[c];
                    }
                    line[j][e][p] = v;
                }
            }
        }
        let mut acc = vec![0.0; d + 1];
        let mut tmp = vec![0.0; d + 1];
        for (t, exps) in self.basis.iter().enumerate() {
            acc.iter_mut().for_each(|v| *v = 0.0);
            acc[0] = 1.0;
            let mut deg = 0;
            for (j, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let e = e as usize;
                tmp.iter_mut().for_each(|v| *v = 0.0);
                for a in 0..=deg {
                    if acc[a] == 0.0 {
                        continue;
                    }
                    for b in 0..=e {
                        tmp[a + b] += acc[a] * line[j][e][b];
                    }
                }
                deg += e;
                acc[..=deg].copy_from_slice(&tmp[..=deg]);
            }
            for (kk, row) in out.iter_mut().enumerate() {
                row[t] = acc[kk];
            }
        }
    }

    /// Human-readable term labels such as `x1^2*x3`.
    pub fn term_labels(&self, names: &[String]) -> Vec<String> {
        self.basis
            .iter()
            .map(|exps| {
                let parts: Vec<String> = exps
                    .iter()
                    .zip(&self.factor_subset)
                    .filter(|(e, _)| **e > 0)
                    .map(|(&e, &c)| if e == 1 { names[c].clone() } else { format!("{}^{e}", names[c]) })
                    .collect();
                if parts.is_empty() {
                    "1".into()
                } else {
                    parts.join("*")
                }
            })
            .collect()
    }

    /// True when every monomial of `self` also appears in `other` (same coordinates).
    pub fn is_submodel_of(&self, other: &PolynomialModel) -> bool {
        let lift = |m: &PolynomialModel, exps: &[u32]| {
            let mut full = std::collections::BTreeMap::new();
            for (&e, &c) in exps.iter().zip(&m.factor_subset) {
                if e > 0 {
                    full.insert(c, e);
                }
            }
            full
        };
        let theirs: std::collections::BTreeSet<_> = other
            .basis
            .iter()
            .map(|b| lift(other, b).into_iter().collect::<Vec<_>>())
            .collect();
        self.basis
            .iter()
            .all(|b| theirs.contains(&lift(self, b).into_iter().collect::<Vec<_>>()))
    }
}
