//! Information and moment matrices, the multivariate I criterion, the D
//! criterion and I-efficiencies.

use crate::error::DesignError;
use crate::geometry::PiRegion;
use crate::poly::PolynomialModel;
use crate::uniform::{rejection_sample, CandidateCloud, DEFAULT_PROPOSAL_BUDGET};
use nalgebra::DMatrix;
use serde::Serialize;

pub const DEFAULT_MOMENT_SAMPLES: usize = 100_000;

/// Relative pivot threshold below which an information matrix counts as singular.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// `M = v⁻¹ ∫ f f′` over a region, with its estimation metadata.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    pub m: DMatrix<f64>,
    /// Monte Carlo standard error of every entry; zero when analytic.
    pub std_error: DMatrix<f64>,
    pub samples: usize,
    pub seed: Option<u64>,
}

/// `N⁻¹ Σ f(x) f(x)′` over the given points.
pub fn moment_matrix_from_points(model: &PolynomialModel, points: &[Vec<f64>], seed: Option<u64>) -> MomentMatrix {
    let m = model.m();
    let n = points.len();
    let mut sum: DMatrix<f64> = DMatrix::zeros(m, m);
    let mut sum_sq: DMatrix<f64> = DMatrix::zeros(m, m);
    let mut f = vec![0.0; m];
    for x in points {
        model.eval_into(x, &mut f);
        for i in 0..m {
            for j in i..m {
                let v = f[i] * f[j];
                sum[(i, j)] += v;
                sum_sq[(i, j)] += v * v;
            }
        }
    }
    let nf = n as f64;
    let mut mean = DMatrix::zeros(m, m);
    let mut se = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mu: f64 = sum[(i, j)] / nf;
            let var: f64 = (sum_sq[(i, j)] / nf - mu * mu).max(0.0);
            let s = if n > 1 { (var * nf / (nf - 1.0) / nf).sqrt() } else { 0.0 };
            mean[(i, j)] = mu;
            mean[(j, i)] = mu;
            se[(i, j)] = s;
            se[(j, i)] = s;
        }
    }
    MomentMatrix {
        m: mean,
        std_error: se,
        samples: n,
        seed,
    }
}

/// Monte Carlo moment matrix from a fresh uniform sample of the scaled region.
pub fn moment_matrix(
    model: &PolynomialModel,
    region: &PiRegion,
    samples: usize,
    seed: u64,
) -> Result<MomentMatrix, DesignError> {
    let cloud = rejection_sample(region, samples, seed, DEFAULT_PROPOSAL_BUDGET)?;
    Ok(moment_matrix_from_cloud(model, &cloud))
}

pub fn moment_matrix_from_cloud(model: &PolynomialModel, cloud: &CandidateCloud) -> MomentMatrix {
    moment_matrix_from_points(model, &cloud.points, Some(cloud.seed))
}

/// `E[x^a]` for `x` uniform on `[-1, 1]`.
fn uniform_moment(a: u32) -> f64 {
    if a % 2 == 1 {
        0.0
    } else {
        1.0 / (a as f64 + 1.0)
    }
}

/// Exact moments of the model over the cube `[-1, 1]^q`.
pub fn cube_moment_matrix(model: &PolynomialModel) -> MomentMatrix {
    let m = model.m();
    let mat = DMatrix::from_fn(m, m, |i, j| {
        model.basis[i]
            .iter()
            .zip(&model.basis[j])
            .map(|(a, b)| uniform_moment(a + b))
            .product()
    });
    MomentMatrix {
        m: mat,
        std_error: DMatrix::zeros(m, m),
        samples: 0,
        seed: None,
    }
}

/// `Σ f(x) f(x)′` over design points given in model coordinates.
pub fn info_matrix(model: &PolynomialModel, points: &[Vec<f64>]) -> DMatrix<f64> {
    let m = model.m();
    let mut out = DMatrix::zeros(m, m);
    let mut f = vec![0.0; m];
    for x in points {
        model.eval_into(x, &mut f);
        for i in 0..m {
            for j in i..m {
                out[(i, j)] += f[i] * f[j];
            }
        }
    }
    for i in 0..m {
        for j in 0..i {
            out[(i, j)] = out[(j, i)];
        }
    }
    out
}

/// Inverse of a symmetric information matrix, or `None` when it is singular
/// relative to its largest diagonal entry.
pub fn dispersion(info: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let m = info.nrows();
    if m == 0 {
        return Some(DMatrix::zeros(0, 0));
    }
    let scale = (0..m).map(|i| info[(i, i)]).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return None;
    }
    let chol = info.clone().cholesky()?;
    let l = chol.l_dirty();
    if (0..m).any(|i| !(l[(i, i)] * l[(i, i)] > SINGULAR_RTOL * scale)) {
        return None;
    }
    Some(chol.inverse())
}

/// `Trace[D A]` for symmetric matrices.
pub fn trace_product(d: &DMatrix<f64>, a: &DMatrix<f64>) -> f64 {
    d.component_mul(a).sum()
}

/// `Trace[D(ξ) M]`; `+∞` when the design is singular for the model.
pub fn i_trace(model: &PolynomialModel, points: &[Vec<f64>], moments: &MomentMatrix) -> f64 {
    match dispersion(&info_matrix(model, points)) {
        Some(d) => trace_product(&d, &moments.m),
        None => f64::INFINITY,
    }
}

/// `Σ w*_i Trace[D_i M_i]` with zero-weight responses skipped; `+∞` when any
/// weighted block is singular. `points[i]` holds the design in the
/// coordinates of model `i`.
pub fn criterion_imv(
    models: &[PolynomialModel],
    points: &[&[Vec<f64>]],
    moments: &[MomentMatrix],
    weights: &[f64],
) -> f64 {
    let mut total = 0.0;
    for i in 0..models.len() {
        if weights[i] == 0.0 {
            continue;
        }
        let t = i_trace(&models[i], points[i], &moments[i]);
        if !t.is_finite() {
            return f64::INFINITY;
        }
        total += weights[i] * t;
    }
    total
}

/// `ln |M(ξ)|` for the block-diagonal matrix `diag(w_i M_i(ξ))`, i.e.
/// `Σ (m_i ln w_i + ln |M_i(ξ)|)`; `-∞` when any block is singular.
pub fn log_d_criterion(models: &[PolynomialModel], points: &[&[Vec<f64>]], weights: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..models.len() {
        let info = info_matrix(&models[i], points[i]);
        if dispersion(&info).is_none() || weights[i] <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let chol = info.cholesky().expect("checked nonsingular");
        let l = chol.l_dirty();
        let logdet: f64 = (0..models[i].m()).map(|j| 2.0 * l[(j, j)].ln()).sum();
        total += models[i].m() as f64 * weights[i].ln() + logdet;
    }
    total
}

/// Dense block-diagonal assembly of `diag(w_i M_i(ξ))`.
pub fn assemble_information(models: &[PolynomialModel], points: &[&[Vec<f64>]], weights: &[f64]) -> DMatrix<f64> {
    let total: usize = models.iter().map(|m| m.m()).sum();
    let mut out = DMatrix::zeros(total, total);
    let mut off = 0;
    for i in 0..models.len() {
        let block = info_matrix(&models[i], points[i]) * weights[i];
        let m = models[i].m();
        out.view_mut((off, off), (m, m)).copy_from(&block);
        off += m;
    }
    out
}

/// `Trace[D(ξ*) M] / Trace[D(ξ) M]` from the two traces; zero when `ξ` is singular.
pub fn efficiency_from_traces(reference: f64, trace: f64) -> f64 {
    if trace.is_finite() && trace > 0.0 {
        reference / trace
    } else {
        0.0
    }
}

/// I-efficiency of `points` relative to `reference_points` for one model.
pub fn i_efficiency(
    model: &PolynomialModel,
    points: &[Vec<f64>],
    reference_points: &[Vec<f64>],
    moments: &MomentMatrix,
) -> f64 {
    efficiency_from_traces(i_trace(model, reference_points, moments), i_trace(model, points, moments))
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub imv: f64,
    pub weights: Vec<f64>,
    pub traces: Vec<f64>,
    pub log_d: f64,
    pub efficiencies: Option<Vec<f64>>,
}

impl CriterionReport {
    pub fn new(
        models: &[PolynomialModel],
        points: &[&[Vec<f64>]],
        moments: &[MomentMatrix],
        weights: &[f64],
        reference_traces: Option<&[f64]>,
    ) -> Self {
        let traces: Vec<f64> = (0..models.len())
            .map(|i| i_trace(&models[i], points[i], &moments[i]))
            .collect();
        let imv = traces
            .iter()
            .zip(weights)
            .filter(|(_, w)| **w != 0.0)
            .map(|(t, w)| w * t)
            .sum();
        let d_weights: Vec<f64> = weights.iter().map(|w| if *w > 0.0 { *w } else { 1.0 }).collect();
        CriterionReport {
            imv,
            weights: weights.to_vec(),
            log_d: log_d_criterion(models, points, &d_weights),
            efficiencies: reference_traces
                .map(|r| r.iter().zip(&traces).map(|(a, b)| efficiency_from_traces(*a, *b)).collect()),
            traces,
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        out.push_str(&format!("I_MV: {}\n", fmt_num(self.imv)));
        out.push_str(&format!("log|M|: {}\n", fmt_num(self.log_d)));
        for (i, t) in self.traces.iter().enumerate() {
            out.push_str(&format!(
                "{}: weight {} trace {}",
                names.get(i).map_or("model", |s| s.as_str()),
                fmt_num(self.weights[i]),
                fmt_num(*t)
            ));
            if let Some(e) = &self.efficiencies {
                out.push_str(&format!(" efficiency {}", fmt_num(e[i])));
            }
            out.push('\n');
        }
        out
    }
}

/// Decimal with 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    crate::export::format_sig(x)
}
