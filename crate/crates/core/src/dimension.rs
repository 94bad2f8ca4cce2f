//! Quantities, dimension matrices and the derivation of dimensionless groups.
//!
//! Predictor groups are the exact nullspace of the predictor dimension matrix
//! `B`. Response groups solve `B y = -a` when every response dimension lies in
//! the column span of `B`; otherwise responses that cannot be made
//! dimensionless even with the help of other responses are excluded and the
//! remaining ones are combined with each other and the predictors.

use crate::error::DimError;
use crate::rational::{canonicalize, display, RatMatrix, Rational};
use num_traits::{One, Signed, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimVector(Vec<Rational>);

impl DimVector {
    pub fn new(exponents: Vec<Rational>) -> Self {
        DimVector(exponents)
    }

    pub fn zero(k: usize) -> Self {
        DimVector(vec![Rational::zero(); k])
    }

    pub fn exponents(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_dimensionless(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// `self + s * other`, exactly.
    pub fn add_scaled(&self, other: &DimVector, s: &Rational) -> DimVector {
        DimVector(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }

    /// Monomial rendering such as `M L^-1 t^-2`; `1` when dimensionless.
    pub fn render(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .zip(names)
            .filter(|(e, _)| !e.is_zero())
            .map(|(e, n)| {
                if e.is_one() {
                    n.clone()
                } else {
                    format!("{n}^{}", display(e))
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" ")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Response,
    Predictor,
    /// Takes part in group derivation like a predictor but is fixed in designs.
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub name: String,
    pub dim: DimVector,
    pub role: Role,
    pub range: Option<(f64, f64)>,
    pub value: Option<f64>,
    pub description: Option<String>,
}

impl Quantity {
    pub fn response(name: &str, dim: DimVector) -> Self {
        Quantity {
            name: name.to_string(),
            dim,
            role: Role::Response,
            range: None,
            value: None,
            description: None,
        }
    }

    pub fn predictor(name: &str, dim: DimVector, lo: f64, hi: f64) -> Self {
        Quantity {
            name: name.to_string(),
            dim,
            role: Role::Predictor,
            range: Some((lo, hi)),
            value: None,
            description: None,
        }
    }

    pub fn constant(name: &str, dim: DimVector, value: f64) -> Self {
        Quantity {
            name: name.to_string(),
            dim,
            role: Role::Constant,
            range: None,
            value: Some(value),
            description: None,
        }
    }

    /// Predictors and constants both enter `B`.
    pub fn is_explanatory(&self) -> bool {
        matches!(self.role, Role::Predictor | Role::Constant)
    }
}

/// A validated dimensional-analysis problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DAProblem {
    pub name: String,
    pub dimensions: Vec<String>,
    pub quantities: Vec<Quantity>,
}

impl DAProblem {
    pub fn new(name: &str, dimensions: Vec<String>, quantities: Vec<Quantity>) -> Result<Self, DimError> {
        let k = dimensions.len();
        for (i, q) in quantities.iter().enumerate() {
            if q.dim.len() != k {
                return Err(DimError::DimensionCount {
                    quantity: q.name.clone(),
                    expected: k,
                    found: q.dim.len(),
                });
            }
            if quantities[..i].iter().any(|o| o.name == q.name) {
                return Err(DimError::Invalid(format!("duplicate quantity name {:?}", q.name)));
            }
            match q.role {
                Role::Predictor => match q.range {
                    Some((lo, hi)) if lo > 0.0 && lo <= hi && hi.is_finite() => {}
                    Some((lo, hi)) => {
                        return Err(DimError::Invalid(format!(
                            "predictor {:?} range [{lo}, {hi}] must satisfy 0 < lo <= hi",
                            q.name
                        )))
                    }
                    None => return Err(DimError::Invalid(format!("predictor {:?} needs a range", q.name))),
                },
                Role::Constant => match q.value {
                    Some(v) if v > 0.0 && v.is_finite() => {}
                    _ => {
                        return Err(DimError::Invalid(format!(
                            "held-constant {:?} needs a single positive value",
                            q.name
                        )))
                    }
                },
                Role::Response => {}
            }
        }
        Ok(DAProblem {
            name: name.to_string(),
            dimensions,
            quantities,
        })
    }

    pub fn k(&self) -> usize {
        self.dimensions.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.quantities.iter().position(|q| q.name == name)
    }

    pub fn dimension_index(&self, name: &str) -> Option<usize> {
        self.dimensions.iter().position(|d| d == name)
    }

    pub fn response_indices(&self) -> Vec<usize> {
        (0..self.quantities.len())
            .filter(|&i| self.quantities[i].role == Role::Response)
            .collect()
    }

    pub fn explanatory_indices(&self) -> Vec<usize> {
        (0..self.quantities.len())
            .filter(|&i| self.quantities[i].is_explanatory())
            .collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.quantities.iter().map(|q| q.name.clone()).collect()
    }

    fn matrix(&self, indices: &[usize], tag: MatrixTag) -> DimensionMatrix {
        DimensionMatrix::new(
            self.k(),
            indices.iter().map(|&i| self.quantities[i].dim.clone()).collect(),
            indices.to_vec(),
            tag,
        )
    }

    /// Response dimension matrix `A`.
    pub fn response_matrix(&self) -> DimensionMatrix {
        self.matrix(&self.response_indices(), MatrixTag::Responses)
    }

    /// Predictor dimension matrix `B` (held-constants included).
    pub fn predictor_matrix(&self) -> DimensionMatrix {
        self.matrix(&self.explanatory_indices(), MatrixTag::Predictors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixTag {
    Responses,
    Predictors,
    Augmented,
}

/// Columns are dimension vectors; `quantity_ids` ties each column back to
/// the problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionMatrix {
    k: usize,
    columns: Vec<DimVector>,
    quantity_ids: Vec<usize>,
    pub tag: MatrixTag,
}

impl DimensionMatrix {
    pub fn new(k: usize, columns: Vec<DimVector>, quantity_ids: Vec<usize>, tag: MatrixTag) -> Self {
        assert_eq!(columns.len(), quantity_ids.len());
        assert!(columns.iter().all(|c| c.len() == k), "column length differs from k");
        DimensionMatrix {
            k,
            columns,
            quantity_ids,
            tag,
        }
    }

    /// Convenience constructor with sequential ids.
    pub fn from_columns(k: usize, columns: Vec<DimVector>, tag: MatrixTag) -> Self {
        let ids = (0..columns.len()).collect();
        DimensionMatrix::new(k, columns, ids, tag)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[DimVector] {
        &self.columns
    }

    pub fn quantity_ids(&self) -> &[usize] {
        &self.quantity_ids
    }

    pub fn to_rat(&self) -> RatMatrix {
        let cols: Vec<Vec<Rational>> = self.columns.iter().map(|c| c.exponents().to_vec()).collect();
        if cols.is_empty() {
            return RatMatrix::zeros(self.k, 0);
        }
        RatMatrix::from_columns(self.k, &cols)
    }

    pub fn hstack(&self, other: &DimensionMatrix, tag: MatrixTag) -> DimensionMatrix {
        let mut columns = self.columns.clone();
        columns.extend(other.columns.iter().cloned());
        let mut ids = self.quantity_ids.clone();
        ids.extend(other.quantity_ids.iter().copied());
        DimensionMatrix::new(self.k, columns, ids, tag)
    }

    fn select(&self, keep: &[usize], tag: MatrixTag) -> DimensionMatrix {
        DimensionMatrix::new(
            self.k,
            keep.iter().map(|&j| self.columns[j].clone()).collect(),
            keep.iter().map(|&j| self.quantity_ids[j]).collect(),
            tag,
        )
    }
}

/// Exact rank over the rationals.
pub fn rank_exact(m: &DimensionMatrix) -> usize {
    m.to_rat().rank()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanCheck {
    pub subset: bool,
    /// Column indices of `A` not in span(B).
    pub failing_columns: Vec<usize>,
}

/// Columnwise test of `A ⊆ span(B)`.
pub fn span_check(a: &DimensionMatrix, b: &DimensionMatrix) -> SpanCheck {
    assert_eq!(a.k(), b.k(), "base-dimension count mismatch");
    let bm = b.to_rat();
    let failing: Vec<usize> = a
        .columns()
        .iter()
        .enumerate()
        .filter(|(_, col)| !bm.spans(col.exponents()))
        .map(|(j, _)| j)
        .collect();
    SpanCheck {
        subset: failing.is_empty(),
        failing_columns: failing,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryFilter {
    /// Column indices of `A` kept.
    pub kept: Vec<usize>,
    /// Column indices of `A` excluded.
    pub excluded: Vec<usize>,
    pub r1: usize,
    pub r2: usize,
    pub r3: usize,
    pub rank_b: usize,
    pub rank_c: usize,
    /// `C = [A* B]` where `A*` holds the kept responses outside span(B).
    pub c: DimensionMatrix,
}

/// Excludes every response with `A_j ∉ span(A_{-j}, B)` and computes the
/// response-count bookkeeping. Errors when nothing remains.
pub fn corollary_filter(a: &DimensionMatrix, b: &DimensionMatrix) -> Result<CorollaryFilter, DimError> {
    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    for j in 0..a.ncols() {
        let others: Vec<usize> = (0..a.ncols()).filter(|&i| i != j).collect();
        let span = a.select(&others, MatrixTag::Augmented).hstack(b, MatrixTag::Augmented).to_rat();
        if span.spans(a.columns()[j].exponents()) {
            kept.push(j);
        } else {
            excluded.push(j);
        }
    }
    if kept.is_empty() {
        return Err(DimError::NoUsableResponses {
            excluded: excluded.iter().map(|&j| a.quantity_ids()[j]).collect(),
        });
    }
    let bm = b.to_rat();
    let outside: Vec<usize> = kept
        .iter()
        .copied()
        .filter(|&j| !bm.spans(a.columns()[j].exponents()))
        .collect();
    let c = a.select(&outside, MatrixTag::Augmented).hstack(b, MatrixTag::Augmented);
    let rank_b = bm.rank();
    let rank_c = rank_exact(&c);
    let r1 = kept.len();
    let r2 = outside.len();
    Ok(CorollaryFilter {
        r3: r1 + rank_b - rank_c,
        kept,
        excluded,
        r1,
        r2,
        rank_b,
        rank_c,
        c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Predictor,
    Response,
}

/// A dimensionless monomial over all problem quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct PiGroup {
    pub name: String,
    pub kind: GroupKind,
    /// Quantity index of the response this group transforms.
    pub response_index: Option<usize>,
    /// One exponent per problem quantity.
    pub exponents: Vec<Rational>,
}

impl PiGroup {
    /// Induced dimension vector `Σ e_j dim_j`, exact.
    pub fn dimension(&self, problem: &DAProblem) -> DimVector {
        self.exponents
            .iter()
            .zip(&problem.quantities)
            .fold(DimVector::zero(problem.k()), |acc, (e, q)| acc.add_scaled(&q.dim, e))
    }

    pub fn is_dimensionless(&self, problem: &DAProblem) -> bool {
        self.dimension(problem).is_dimensionless()
    }

    /// `rho d^3 m^-1` style rendering.
    pub fn formula(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .exponents
            .iter()
            .zip(names)
            .filter(|(e, _)| !e.is_zero())
            .map(|(e, n)| {
                if e.is_one() {
                    n.clone()
                } else {
                    format!("{n}^{}", display(e))
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" ")
        }
    }

    pub fn exponent_of(&self, idx: usize) -> &Rational {
        &self.exponents[idx]
    }
}

impl fmt::Display for PiGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

fn lift(problem_len: usize, ids: &[usize], local: &[Rational]) -> Vec<Rational> {
    let mut full = vec![Rational::zero(); problem_len];
    for (&id, v) in ids.iter().zip(local) {
        full[id] = v.clone();
    }
    full
}

/// Canonical nullspace basis of `B`; `total` is the number of problem
/// quantities that exponents are lifted onto.
pub fn predictor_pi_groups(b: &DimensionMatrix, total: usize) -> Vec<PiGroup> {
    let ns = b.to_rat().nullspace();
    if ns.is_empty() {
        log::warn!("no dimensionless predictors: p = rank(B)");
    }
    ns.into_iter()
        .enumerate()
        .map(|(i, v)| PiGroup {
            name: format!("pi{}", i + 1),
            kind: GroupKind::Predictor,
            response_index: None,
            exponents: lift(total, b.quantity_ids(), &canonicalize(&v)),
        })
        .collect()
}

/// Response groups. Each kept response whose column is not a pivot of
/// `[B A_kept]` yields one group with exponent 1 on itself; the other
/// exponents are the basic solution of the eliminated system, so they touch
/// only pivot predictors and pivot responses.
pub fn response_pi_groups(
    a: &DimensionMatrix,
    b: &DimensionMatrix,
    kept: &[usize],
    total: usize,
) -> Result<Vec<PiGroup>, DimError> {
    let a_kept = a.select(kept, MatrixTag::Responses);
    let combined = b.hstack(&a_kept, MatrixTag::Augmented);
    let (rref, pivots) = combined.to_rat().rref();
    let p = b.ncols();
    let mut groups = Vec::new();
    for (local, &col) in kept.iter().enumerate() {
        let cidx = p + local;
        if pivots.contains(&cidx) {
            continue;
        }
        let mut v = vec![Rational::zero(); combined.ncols()];
        v[cidx] = Rational::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -rref.get(row, cidx).clone();
        }
        let qid = a.quantity_ids()[col];
        groups.push(PiGroup {
            name: String::new(),
            kind: GroupKind::Response,
            response_index: Some(qid),
            exponents: lift(total, combined.quantity_ids(), &v),
        });
    }
    for (i, g) in groups.iter_mut().enumerate() {
        g.name = format!("pi0_{}", i + 1);
    }
    // A pivot response is absorbed into the other groups; it must still be
    // expressible through the remaining responses and the predictors.
    for (local, &col) in kept.iter().enumerate() {
        if !pivots.contains(&(p + local)) {
            continue;
        }
        let others: Vec<usize> = kept.iter().copied().filter(|&j| j != col).collect();
        let span = a.select(&others, MatrixTag::Augmented).hstack(b, MatrixTag::Augmented).to_rat();
        if !span.spans(a.columns()[col].exponents()) {
            return Err(DimError::UnsolvableResponse(a.quantity_ids()[col]));
        }
    }
    Ok(groups)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupCounts {
    pub r1: usize,
    pub r2: usize,
    pub r3: usize,
    pub rank_b: usize,
    pub rank_c: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DAModel {
    pub predictor_groups: Vec<PiGroup>,
    pub response_groups: Vec<PiGroup>,
    /// (quantity index, reason)
    pub excluded_responses: Vec<(usize, String)>,
    pub counts: GroupCounts,
    /// Whether every response lay in span(B).
    pub theorem_path: bool,
    pub span: SpanCheck,
}

/// Runs the span check and, if needed, the corollary filter, then derives
/// predictor and response groups.
pub fn derive_model(problem: &DAProblem) -> Result<DAModel, DimError> {
    let a = problem.response_matrix();
    let b = problem.predictor_matrix();
    let total = problem.quantities.len();
    let span = span_check(&a, &b);
    let rank_b = rank_exact(&b);
    let predictor_groups = predictor_pi_groups(&b, total);
    let (kept, excluded, counts) = if span.subset {
        let r = a.ncols();
        (
            (0..r).collect::<Vec<_>>(),
            Vec::new(),
            GroupCounts {
                r1: r,
                r2: 0,
                r3: r,
                rank_b,
                rank_c: rank_b,
            },
        )
    } else {
        let cf = corollary_filter(&a, &b)?;
        let counts = GroupCounts {
            r1: cf.r1,
            r2: cf.r2,
            r3: cf.r3,
            rank_b: cf.rank_b,
            rank_c: cf.rank_c,
        };
        (cf.kept, cf.excluded, counts)
    };
    let response_groups = response_pi_groups(&a, &b, &kept, total)?;
    debug_assert_eq!(response_groups.len(), counts.r3);
    let excluded_responses = excluded
        .iter()
        .map(|&j| {
            (
                a.quantity_ids()[j],
                "dimension not in span of the other responses and the predictors".to_string(),
            )
        })
        .collect();
    Ok(DAModel {
        predictor_groups,
        response_groups,
        excluded_responses,
        counts,
        theorem_path: span.subset,
        span,
    })
}

/// True when two sets of exponent vectors span the same space (exact).
pub fn same_span(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> bool {
    if a.is_empty() || b.is_empty() {
        return a.iter().all(|v| v.iter().all(Zero::is_zero)) && b.iter().all(|v| v.iter().all(Zero::is_zero));
    }
    let n = a[0].len();
    let ma = RatMatrix::from_columns(n, a);
    let mb = RatMatrix::from_columns(n, b);
    let ra = ma.rank();
    ra == mb.rank() && ma.hstack(&mb).rank() == ra
}

/// Builds an exponent vector from `(name, exponent)` pairs.
pub fn exponents_by_name(problem: &DAProblem, pairs: &[(&str, Rational)]) -> Result<Vec<Rational>, DimError> {
    let mut v = vec![Rational::zero(); problem.quantities.len()];
    for (name, e) in pairs {
        let idx = problem
            .index_of(name)
            .ok_or_else(|| DimError::Invalid(format!("unknown quantity {name:?}")))?;
        v[idx] = e.clone();
    }
    Ok(v)
}

/// Largest absolute exponent magnitude; used in reports.
pub fn max_abs_exponent(g: &PiGroup) -> Rational {
    g.exponents
        .iter()
        .map(|e| e.abs())
        .fold(Rational::zero(), |a, b| if b > a { b } else { a })
}
