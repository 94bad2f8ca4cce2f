//! Bounded-variable linear least squares, `min ‖A z − b‖₂` subject to
//! `lo ≤ z ≤ hi`.
//!
//! Gradient-projection iterations with an exact step along the projected
//! gradient, each followed by a minimum-norm least-squares step on the free
//! variables truncated at the first bound it meets. Converges when the
//! projected gradient vanishes.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct BvlsOptions {
    pub max_iter: usize,
    /// Projected-gradient norm threshold, relative to `max(1, ‖r‖)`.
    pub gtol: f64,
}

impl Default for BvlsOptions {
    fn default() -> Self {
        BvlsOptions {
            max_iter: 10_000,
            gtol: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BvlsSolution {
    pub z: Vec<f64>,
    /// ‖A z − b‖₂ at the returned point.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn projected_gradient(z: &[f64], g: &DVector<f64>, lo: &[f64], hi: &[f64]) -> DVector<f64> {
    DVector::from_iterator(
        z.len(),
        (0..z.len()).map(|i| {
            let gi = g[i];
            if (z[i] <= lo[i] && gi > 0.0) || (z[i] >= hi[i] && gi < 0.0) {
                0.0
            } else {
                gi
            }
        }),
    )
}

fn clamp_into(z: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..z.len() {
        z[i] = z[i].clamp(lo[i], hi[i]);
    }
}

fn residual(a: &DMatrix<f64>, b: &DVector<f64>, z: &[f64]) -> DVector<f64> {
    a * DVector::from_column_slice(z) - b
}

pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>, lo: &[f64], hi: &[f64], z0: &[f64], opts: BvlsOptions) -> BvlsSolution {
    let n = a.ncols();
    assert_eq!(lo.len(), n);
    assert_eq!(hi.len(), n);
    assert_eq!(b.len(), a.nrows());
    let mut z = z0.to_vec();
    clamp_into(&mut z, lo, hi);
    let mut r = residual(a, b, &z);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;
        let g = a.transpose() * &r;
        let pg = projected_gradient(&z, &g, lo, hi);
        let pg_norm = pg.norm();
        if pg_norm <= opts.gtol * r.norm().max(1.0) {
            converged = true;
            break;
        }

        // Exact minimizer along -pg, then project; halve until the
        // objective does not increase.
        let apg = a * &pg;
        let denom = apg.norm_squared();
        if denom > 0.0 {
            let f0 = r.norm_squared();
            let mut alpha = pg.dot(&g) / denom;
            for _ in 0..40 {
                let mut trial: Vec<f64> = z.iter().zip(pg.iter()).map(|(zi, gi)| zi - alpha * gi).collect();
                clamp_into(&mut trial, lo, hi);
                let rt = residual(a, b, &trial);
                if rt.norm_squared() <= f0 {
                    z = trial;
                    r = rt;
                    break;
                }
                alpha *= 0.5;
            }
        }

        // Subspace step on the free variables.
        let free: Vec<usize> = (0..n).filter(|&i| z[i] > lo[i] && z[i] < hi[i]).collect();
        if !free.is_empty() {
            let af = DMatrix::from_fn(a.nrows(), free.len(), |i, j| a[(i, free[j])]);
            let svd = af.svd(true, true);
            let eps = 1e-13 * svd.singular_values.max().max(1.0);
            if let Ok(delta) = svd.solve(&(-&r), eps) {
                let mut t: f64 = 1.0;
                for (j, &i) in free.iter().enumerate() {
                    let d = delta[j];
                    if d > 0.0 {
                        t = t.min((hi[i] - z[i]) / d);
                    } else if d < 0.0 {
                        t = t.min((lo[i] - z[i]) / d);
                    }
                }
                let t = t.max(0.0);
                let mut trial = z.clone();
                for (j, &i) in free.iter().enumerate() {
                    let reached_hi = delta[j] > 0.0 && (hi[i] - z[i]) / delta[j] <= t;
                    let reached_lo = delta[j] < 0.0 && (lo[i] - z[i]) / delta[j] <= t;
                    trial[i] = if reached_hi {
                        hi[i]
                    } else if reached_lo {
                        lo[i]
                    } else {
                        z[i] + t * delta[j]
                    };
                }
                clamp_into(&mut trial, lo, hi);
                let rt = residual(a, b, &trial);
                if rt.norm_squared() <= r.norm_squared() {
                    z = trial;
                    r = rt;
                }
            }
        }
    }

    BvlsSolution {
        residual: r.norm(),
        z,
        iterations,
        converged,
    }
}
