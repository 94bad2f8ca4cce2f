//! The factor box, its image in log-π space and the cube scaling used by
//! every design criterion.
//!
//! `log π(v) = U log v + c` is linear in `log v`, so the region is the linear
//! image of a box: its bounding box comes from the vertex images, and
//! membership and back-solving reduce to box-constrained least squares.

use crate::bvls::{self, BvlsOptions};
use crate::dimension::{DAProblem, PiGroup, Role};
use crate::error::GeometryError;
use crate::rational::to_f64;
use nalgebra::{DMatrix, DVector};

/// Default feasibility tolerance in scaled coordinates.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FactorBox {
    pub names: Vec<String>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Held-constant quantities and their values.
    pub constants: Vec<(String, f64)>,
}

impl FactorBox {
    pub fn new(names: Vec<String>, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, GeometryError> {
        if names.len() != lo.len() || lo.len() != hi.len() || lo.is_empty() {
            return Err(GeometryError::Invalid("factor box needs matching, nonempty bounds".into()));
        }
        for i in 0..lo.len() {
            if !(lo[i] > 0.0 && lo[i] <= hi[i] && hi[i].is_finite()) {
                return Err(GeometryError::Invalid(format!(
                    "factor {:?} bounds [{}, {}] must satisfy 0 < lo <= hi",
                    names[i], lo[i], hi[i]
                )));
            }
        }
        Ok(FactorBox {
            names,
            lo,
            hi,
            constants: Vec::new(),
        })
    }

    pub fn from_problem(problem: &DAProblem) -> Result<Self, GeometryError> {
        let mut names = Vec::new();
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        let mut constants = Vec::new();
        for q in &problem.quantities {
            match q.role {
                Role::Predictor => {
                    let (a, b) = q.range.expect("validated predictor range");
                    names.push(q.name.clone());
                    lo.push(a);
                    hi.push(b);
                }
                Role::Constant => constants.push((q.name.clone(), q.value.expect("validated constant"))),
                Role::Response => {}
            }
        }
        let mut b = FactorBox::new(names, lo, hi)?;
        b.constants = constants;
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn log_lo(&self) -> Vec<f64> {
        self.lo.iter().map(|x| x.ln()).collect()
    }

    pub fn log_hi(&self) -> Vec<f64> {
        self.hi.iter().map(|x| x.ln()).collect()
    }

    /// Membership with a relative slack of `1e-12` for round-tripped values.
    pub fn check(&self, v: &[f64]) -> Result<(), GeometryError> {
        if v.len() != self.dim() {
            return Err(GeometryError::Arity {
                expected: self.dim(),
                found: v.len(),
            });
        }
        for (i, &x) in v.iter().enumerate() {
            let slack = 1e-12 * self.hi[i];
            if !(x > 0.0) || x < self.lo[i] - slack || x > self.hi[i] + slack {
                return Err(GeometryError::OutsideBox {
                    index: i,
                    value: x,
                    lo: self.lo[i],
                    hi: self.hi[i],
                });
            }
        }
        Ok(())
    }

    /// Box point from unit coordinates `u ∈ [0,1]^p`, interpolating in log space.
    pub fn from_unit_log(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(i, &t)| {
                let (a, b) = (self.lo[i].ln(), self.hi[i].ln());
                (a + t * (b - a)).exp().clamp(self.lo[i], self.hi[i])
            })
            .collect()
    }

    /// Linear scaling of the box onto `[-1, 1]^p`.
    pub fn to_linear_cube(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(i, &x)| {
                let w = self.hi[i] - self.lo[i];
                if w > 0.0 {
                    2.0 * (x - self.lo[i]) / w - 1.0
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// `log π = U log v + c` over the varying predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPiMap {
    pub u: DMatrix<f64>,
    pub c: DVector<f64>,
    pub group_names: Vec<String>,
}

impl LogPiMap {
    pub fn new(u: DMatrix<f64>, c: DVector<f64>, group_names: Vec<String>) -> Self {
        assert_eq!(u.nrows(), c.len());
        assert_eq!(u.nrows(), group_names.len());
        LogPiMap { u, c, group_names }
    }

    /// Rows from the group exponents on varying predictors; constants fold into `c`.
    pub fn from_groups(problem: &DAProblem, groups: &[PiGroup]) -> Result<Self, GeometryError> {
        let varying: Vec<usize> = (0..problem.quantities.len())
            .filter(|&i| problem.quantities[i].role == Role::Predictor)
            .collect();
        let q = groups.len();
        let mut u = DMatrix::zeros(q, varying.len());
        let mut c = DVector::zeros(q);
        for (gi, g) in groups.iter().enumerate() {
            for (qi, quantity) in problem.quantities.iter().enumerate() {
                let e = to_f64(g.exponent_of(qi));
                if e == 0.0 {
                    continue;
                }
                match quantity.role {
                    Role::Predictor => {
                        let col = varying.iter().position(|&v| v == qi).unwrap();
                        u[(gi, col)] = e;
                    }
                    Role::Constant => c[gi] += e * quantity.value.unwrap().ln(),
                    Role::Response => {
                        return Err(GeometryError::Invalid(format!(
                            "design group {} involves response {}",
                            g.name, quantity.name
                        )))
                    }
                }
            }
        }
        Ok(LogPiMap::new(u, c, groups.iter().map(|g| g.name.clone()).collect()))
    }

    pub fn q(&self) -> usize {
        self.u.nrows()
    }

    pub fn p(&self) -> usize {
        self.u.ncols()
    }

    pub fn log_pi_from_log(&self, z: &[f64]) -> Vec<f64> {
        (&self.u * DVector::from_column_slice(z) + &self.c).iter().copied().collect()
    }

    pub fn log_pi(&self, v: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = v.iter().map(|x| x.ln()).collect();
        self.log_pi_from_log(&z)
    }

    /// Rows of `U` that are identically zero (π constant over any box).
    pub fn zero_rows(&self) -> Vec<usize> {
        (0..self.q())
            .filter(|&j| self.u.row(j).iter().all(|&x| x == 0.0))
            .collect()
    }
}

/// Per-coordinate affine map of a bounding box onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeScaling {
    pub mid: Vec<f64>,
    pub half: Vec<f64>,
}

impl CubeScaling {
    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Result<Self, GeometryError> {
        let mut mid = Vec::with_capacity(lo.len());
        let mut half = Vec::with_capacity(lo.len());
        for j in 0..lo.len() {
            let h = 0.5 * (hi[j] - lo[j]);
            if !(h > 1e-12 * (1.0 + lo[j].abs().max(hi[j].abs()))) {
                return Err(GeometryError::DegenerateCoordinate(j));
            }
            mid.push(0.5 * (hi[j] + lo[j]));
            half.push(h);
        }
        Ok(CubeScaling { mid, half })
    }

    pub fn scale(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(self.mid.iter().zip(&self.half))
            .map(|(v, (m, h))| (v - m) / h)
            .collect()
    }

    pub fn unscale(&self, s: &[f64]) -> Vec<f64> {
        s.iter()
            .zip(self.mid.iter().zip(&self.half))
            .map(|(v, (m, h))| v * h + m)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappedPoint {
    pub pi: Vec<f64>,
    pub logpi: Vec<f64>,
    pub scaled: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Backsolved {
    pub v: Vec<f64>,
    /// ‖U log v + c − target‖₂ in scaled coordinates.
    pub residual: f64,
    pub converged: bool,
}

/// The log-π design region with eagerly built caches.
#[derive(Debug, Clone)]
pub struct PiRegion {
    pub map: LogPiMap,
    pub factor_box: FactorBox,
    vertices: Vec<Vec<f64>>,
    bbox_lo: Vec<f64>,
    bbox_hi: Vec<f64>,
    scaling: CubeScaling,
    /// Scaled map in terms of unit-box coordinates `t ∈ [-1,1]^p`
    /// (`log v = log_mid + log_half ⊙ t`): `scaled = a t + b0`.
    a_t: DMatrix<f64>,
    b0: DVector<f64>,
    log_mid: Vec<f64>,
    log_half: Vec<f64>,
    facets: Option<Facets>,
}

/// Halfspace form `|n_k · (s - b0)| <= h_k` of a full-dimensional zonotope.
#[derive(Debug, Clone)]
struct Facets {
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

/// Subsets of `0..p` of size `k` in lexicographic order.
fn subsets(p: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, p: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..p {
            if p - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, p, k, cur, out);
            cur.pop();
        }
    }
    rec(0, p, k, &mut cur, &mut out);
    out
}

/// Facet normals of the zonotope generated by the columns of `a`: each
/// `(q-1)`-subset of independent generators contributes its orthogonal
/// complement. `None` when the generators do not span `R^q` or the
/// enumeration would be too large.
fn zonotope_facets(a: &DMatrix<f64>) -> Option<Facets> {
    let (q, p) = a.shape();
    if q == 0 || p < q || a.rank(1e-10 * a.norm().max(1.0)) < q {
        return None;
    }
    let count = crate::poly::binomial(p, q - 1);
    if count > 20_000 {
        return None;
    }
    let mut normals = Vec::new();
    let mut offsets = Vec::new();
    for sub in subsets(p, q - 1) {
        // n_j = (-1)^j det(G without row j): orthogonal to every column of G.
        let n: Vec<f64> = (0..q)
            .map(|j| {
                let minor = DMatrix::from_fn(q - 1, q - 1, |r, c| a[(if r < j { r } else { r + 1 }, sub[c])]);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * minor.determinant()
            })
            .collect();
        let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        let n: Vec<f64> = n.iter().map(|x| x / norm).collect();
        let h: f64 = (0..p)
            .map(|i| (0..q).map(|r| n[r] * a[(r, i)]).sum::<f64>().abs())
            .sum();
        normals.push(n);
        offsets.push(h);
    }
    Some(Facets { normals, offsets })
}

impl PiRegion {
    pub fn new(map: LogPiMap, factor_box: FactorBox) -> Result<Self, GeometryError> {
        if map.p() != factor_box.dim() {
            return Err(GeometryError::Arity {
                expected: factor_box.dim(),
                found: map.p(),
            });
        }
        let vertices = vertex_images(&map, &factor_box)?;
        let q = map.q();
        let mut bbox_lo = vec![f64::INFINITY; q];
        let mut bbox_hi = vec![f64::NEG_INFINITY; q];
        for v in &vertices {
            for j in 0..q {
                bbox_lo[j] = bbox_lo[j].min(v[j]);
                bbox_hi[j] = bbox_hi[j].max(v[j]);
            }
        }
        let scaling = CubeScaling::from_bounds(&bbox_lo, &bbox_hi)?;
        let log_lo = factor_box.log_lo();
        let log_hi = factor_box.log_hi();
        let log_mid: Vec<f64> = log_lo.iter().zip(&log_hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let log_half: Vec<f64> = log_lo.iter().zip(&log_hi).map(|(a, b)| 0.5 * (b - a)).collect();
        let inv_half = DMatrix::from_diagonal(&DVector::from_iterator(q, scaling.half.iter().map(|h| 1.0 / h)));
        let a_t = &inv_half * &map.u * DMatrix::from_diagonal(&DVector::from_column_slice(&log_half));
        let center = map.log_pi_from_log(&log_mid);
        let b0 = DVector::from_vec(scaling.scale(&center));
        let facets = zonotope_facets(&a_t);
        Ok(PiRegion {
            map,
            factor_box,
            vertices,
            bbox_lo,
            bbox_hi,
            scaling,
            a_t,
            b0,
            log_mid,
            log_half,
            facets,
        })
    }

    pub fn q(&self) -> usize {
        self.map.q()
    }

    pub fn p(&self) -> usize {
        self.map.p()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn bounding_box(&self) -> (&[f64], &[f64]) {
        (&self.bbox_lo, &self.bbox_hi)
    }

    pub fn scaling(&self) -> &CubeScaling {
        &self.scaling
    }

    pub fn map_point(&self, v: &[f64]) -> Result<MappedPoint, GeometryError> {
        self.factor_box.check(v)?;
        let logpi = self.map.log_pi(v);
        let pi = logpi.iter().map(|x| x.exp()).collect();
        let scaled = self.scaling.scale(&logpi);
        Ok(MappedPoint { pi, logpi, scaled })
    }

    /// Scaled image of a point given in unit-box coordinates `t ∈ [-1,1]^p`.
    pub fn scaled_from_t(&self, t: &[f64]) -> Vec<f64> {
        (&self.a_t * DVector::from_column_slice(t) + &self.b0).iter().copied().collect()
    }

    /// Writes the scaled image of `t` into `out` without allocating.
    pub fn scaled_from_t_into(&self, t: &[f64], out: &mut [f64]) {
        let q = self.q();
        for j in 0..q {
            let mut s = self.b0[j];
            for (i, ti) in t.iter().enumerate() {
                s += self.a_t[(j, i)] * ti;
            }
            out[j] = s;
        }
    }

    /// Column `i` of the scaled map: the change in scaled coordinates per unit of `t_i`.
    pub fn scaled_column(&self, i: usize) -> Vec<f64> {
        self.a_t.column(i).iter().copied().collect()
    }

    pub fn t_from_v(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(i, x)| {
                if self.log_half[i] > 0.0 {
                    ((x.ln() - self.log_mid[i]) / self.log_half[i]).clamp(-1.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn v_from_t(&self, t: &[f64]) -> Vec<f64> {
        t.iter()
            .enumerate()
            .map(|(i, ti)| {
                (self.log_mid[i] + self.log_half[i] * ti)
                    .exp()
                    .clamp(self.factor_box.lo[i], self.factor_box.hi[i])
            })
            .collect()
    }

    /// Linear `[-1,1]` coordinate of factor `i` at log-box coordinate `t_i`.
    pub fn linear_coord(&self, i: usize, t_i: f64) -> f64 {
        let (lo, hi) = (self.factor_box.lo[i], self.factor_box.hi[i]);
        if hi > lo {
            let v = (self.log_mid[i] + self.log_half[i] * t_i).exp().clamp(lo, hi);
            2.0 * (v - lo) / (hi - lo) - 1.0
        } else {
            0.0
        }
    }

    fn solve_scaled(&self, scaled_target: &[f64]) -> bvls::BvlsSolution {
        let b = DVector::from_column_slice(scaled_target) - &self.b0;
        let p = self.p();
        bvls::solve(&self.a_t, &b, &vec![-1.0; p], &vec![1.0; p], &vec![0.0; p], BvlsOptions::default())
    }

    /// Membership for a point in scaled coordinates.
    pub fn contains_scaled(&self, s: &[f64], tol: f64) -> Result<bool, GeometryError> {
        if s.len() != self.q() {
            return Err(GeometryError::Arity {
                expected: self.q(),
                found: s.len(),
            });
        }
        let sol = self.solve_scaled(s);
        if !sol.converged && sol.residual > tol {
            return Err(GeometryError::NoConvergence {
                residual: sol.residual,
                iterations: sol.iterations,
            });
        }
        Ok(sol.residual <= tol)
    }

    /// Fast membership via the halfspace form, falling back to
    /// [`contains_scaled`](Self::contains_scaled) when no facet list exists.
    /// Agrees with it up to `tol` at the boundary.
    pub fn contains_scaled_fast(&self, s: &[f64], tol: f64) -> Result<bool, GeometryError> {
        match &self.facets {
            None => self.contains_scaled(s, tol),
            Some(f) => {
                if s.len() != self.q() {
                    return Err(GeometryError::Arity {
                        expected: self.q(),
                        found: s.len(),
                    });
                }
                for (n, h) in f.normals.iter().zip(&f.offsets) {
                    let mut d = 0.0;
                    for j in 0..s.len() {
                        d += n[j] * (s[j] - self.b0[j]);
                    }
                    if d.abs() > h + tol {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    pub fn facet_count(&self) -> Option<usize> {
        self.facets.as_ref().map(|f| f.normals.len())
    }

    /// Membership for a point in log-π coordinates; `tol` applies to the
    /// scaled residual.
    pub fn contains(&self, logpi: &[f64], tol: f64) -> Result<bool, GeometryError> {
        if logpi.len() != self.q() {
            return Err(GeometryError::Arity {
                expected: self.q(),
                found: logpi.len(),
            });
        }
        self.contains_scaled(&self.scaling.scale(logpi), tol)
    }

    pub fn backsolve_scaled(&self, s: &[f64]) -> Backsolved {
        let sol = self.solve_scaled(s);
        Backsolved {
            v: self.v_from_t(&sol.z),
            residual: sol.residual,
            converged: sol.converged,
        }
    }

    /// Factor settings whose log-π image is closest to `target`.
    pub fn backsolve(&self, logpi: &[f64]) -> Backsolved {
        self.backsolve_scaled(&self.scaling.scale(logpi))
    }
}

/// Images of all `2^p` box vertices.
pub fn vertex_images(map: &LogPiMap, factor_box: &FactorBox) -> Result<Vec<Vec<f64>>, GeometryError> {
    let p = factor_box.dim();
    if p > 20 {
        return Err(GeometryError::TooManyFactors(p));
    }
    let lo = factor_box.log_lo();
    let hi = factor_box.log_hi();
    Ok((0u32..(1u32 << p))
        .map(|mask| {
            let z: Vec<f64> = (0..p)
                .map(|i| if mask & (1 << i) != 0 { hi[i] } else { lo[i] })
                .collect();
            map.log_pi_from_log(&z)
        })
        .collect())
}
