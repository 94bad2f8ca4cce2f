//! Uniform rejection sampling on the scaled region and Fast Flexible Filling
//! designs built from the resulting candidate cloud.

use crate::error::DesignError;
use crate::geometry::{PiRegion, DEFAULT_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const DEFAULT_PROPOSAL_BUDGET: u64 = 1_000_000_000;
/// Proposals per RNG substream.
const CHUNK: u64 = 4096;
/// Chunks drawn per parallel batch.
const BATCH: u64 = 64;

#[derive(Debug, Clone)]
pub struct CandidateCloud {
    /// Accepted points in scaled coordinates.
    pub points: Vec<Vec<f64>>,
    pub proposed: u64,
    pub acceptance_rate: f64,
    pub seed: u64,
}

fn sample_chunk(region: &PiRegion, seed: u64, stream: u64, count: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let q = region.q();
    let mut out = Vec::new();
    let mut s = vec![0.0; q];
    for _ in 0..count {
        for x in s.iter_mut() {
            *x = rng.random_range(-1.0..=1.0);
        }
        if region.contains_scaled_fast(&s, DEFAULT_TOL).unwrap_or(false) {
            out.push(s.clone());
        }
    }
    out
}

/// `n` points uniform on the region, drawn from `[-1,1]^q` by rejection.
///
/// Chunk `k` of 4096 proposals always uses substream `k`, so the result is
/// independent of the thread count. `proposed` counts proposals up to and
/// including the one that produced the `n`-th acceptance.
pub fn rejection_sample(region: &PiRegion, n: usize, seed: u64, budget: u64) -> Result<CandidateCloud, DesignError> {
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut proposed: u64 = 0;
    let mut next_chunk: u64 = 0;
    while points.len() < n {
        if proposed >= budget {
            let rate = points.len() as f64 / proposed.max(1) as f64;
            return Err(DesignError::ProposalBudget {
                proposed,
                accepted: points.len(),
                rate,
            });
        }
        if proposed >= 1_000_000 && (points.len() as f64) < 1e-4 * proposed as f64 {
            return Err(DesignError::LowAcceptance(points.len() as f64 / proposed as f64));
        }
        let chunks: Vec<u64> = (next_chunk..next_chunk + BATCH).collect();
        next_chunk += BATCH;
        let results: Vec<Vec<Vec<f64>>> = chunks
            .par_iter()
            .map(|&k| sample_chunk(region, seed, k, CHUNK))
            .collect();
        for (k, chunk) in chunks.iter().zip(results) {
            if points.len() + chunk.len() < n {
                points.extend(chunk);
                proposed += CHUNK;
            } else {
                // Count proposals exactly up to the last needed acceptance.
                let need = n - points.len();
                let last = find_proposal_index(region, seed, *k, need);
                points.extend(chunk.into_iter().take(need));
                proposed += last;
                break;
            }
        }
    }
    Ok(CandidateCloud {
        acceptance_rate: n as f64 / proposed.max(1) as f64,
        points,
        proposed,
        seed,
    })
}

/// Number of proposals in chunk `stream` consumed to collect `need` acceptances.
fn find_proposal_index(region: &PiRegion, seed: u64, stream: u64, need: usize) -> u64 {
    if need == 0 {
        return 0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut s = vec![0.0; region.q()];
    let mut got = 0;
    for i in 0..CHUNK {
        for x in s.iter_mut() {
            *x = rng.random_range(-1.0..=1.0);
        }
        if region.contains_scaled_fast(&s, DEFAULT_TOL).unwrap_or(false) {
            got += 1;
            if got == need {
                return i + 1;
            }
        }
    }
    CHUNK
}

/// Ward merge: clusters represented by their lowest point index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
}

fn ward(na: f64, ca: &[f64], nb: f64, cb: &[f64]) -> f64 {
    let d2: f64 = ca.iter().zip(cb).map(|(x, y)| (x - y) * (x - y)).sum();
    na * nb / (na + nb) * d2
}

/// Full Ward dendrogram by nearest-neighbour chains over centroids.
/// Returned merges are in execution order; ties go to the lowest index.
pub fn ward_merges(points: &[Vec<f64>]) -> Vec<Merge> {
    let n = points.len();
    let mut centroid: Vec<Vec<f64>> = points.to_vec();
    let mut size = vec![1.0f64; n];
    let mut active_list: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut chain: Vec<usize> = Vec::new();

    let nearest = |x: usize, active_list: &[usize], centroid: &[Vec<f64>], size: &[f64]| -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for &y in active_list {
            if y == x {
                continue;
            }
            let d = ward(size[x], &centroid[x], size[y], &centroid[y]);
            if d < best.1 || (d == best.1 && y < best.0) {
                best = (y, d);
            }
        }
        best
    };

    while active_list.len() > 1 {
        if chain.is_empty() {
            chain.push(active_list[0]);
        }
        loop {
            let x = *chain.last().unwrap();
            let (mut y, d) = nearest(x, &active_list, &centroid, &size);
            // Prefer the previous chain element on ties so the chain terminates.
            if chain.len() >= 2 {
                let prev = chain[chain.len() - 2];
                if ward(size[x], &centroid[x], size[prev], &centroid[prev]) <= d {
                    y = prev;
                }
            }
            if chain.len() >= 2 && y == chain[chain.len() - 2] {
                chain.pop();
                chain.pop();
                let (a, b) = if x < y { (x, y) } else { (y, x) };
                let height = ward(size[a], &centroid[a], size[b], &centroid[b]);
                let (sa, sb) = (size[a], size[b]);
                for j in 0..centroid[a].len() {
                    centroid[a][j] = (sa * centroid[a][j] + sb * centroid[b][j]) / (sa + sb);
                }
                size[a] = sa + sb;
                active_list.retain(|&i| i != b);
                merges.push(Merge { a, b, height });
                break;
            }
            chain.push(y);
        }
    }
    merges
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Cluster label (0..k) of every point after applying the lowest `n - k`
/// merges. Labels are ordered by each cluster's lowest point index.
pub fn cut_dendrogram(n: usize, merges: &[Merge], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..merges.len()).collect();
    order.sort_by(|&i, &j| merges[i].height.total_cmp(&merges[j].height).then(i.cmp(&j)));
    let mut uf = UnionFind::new(n);
    for &i in order.iter().take(n.saturating_sub(k)) {
        uf.union(merges[i].a, merges[i].b);
    }
    let mut label = vec![usize::MAX; n];
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = uf.find(i);
        let l = match roots.iter().position(|&x| x == r) {
            Some(l) => l,
            None => {
                roots.push(r);
                roots.len() - 1
            }
        };
        label[i] = l;
    }
    label
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Representative {
    #[default]
    Centroid,
    NearestCandidate,
}

#[derive(Debug, Clone)]
pub struct FffDesign {
    /// Design points in scaled coordinates.
    pub scaled: Vec<Vec<f64>>,
    /// Back-solved factor settings.
    pub factors: Vec<Vec<f64>>,
    /// Back-solve residuals, all within tolerance.
    pub residuals: Vec<f64>,
    /// Cluster label of every cloud point.
    pub labels: Vec<usize>,
}

/// Fast Flexible Filling: Ward-cluster the cloud into `n` groups and take one
/// representative per group.
pub fn fff_select(
    region: &PiRegion,
    cloud: &CandidateCloud,
    n: usize,
    representative: Representative,
) -> Result<FffDesign, DesignError> {
    let big_n = cloud.points.len();
    if n == 0 || n > big_n {
        return Err(DesignError::Invalid(format!("cannot select {n} points from a cloud of {big_n}")));
    }
    if n * 10 > big_n {
        log::warn!("{n} clusters from {big_n} candidates leaves fewer than ten points per cluster");
    }
    let merges = ward_merges(&cloud.points);
    let labels = cut_dendrogram(big_n, &merges, n);
    let q = region.q();
    let mut sums = vec![vec![0.0; q]; n];
    let mut counts = vec![0usize; n];
    for (p, &l) in cloud.points.iter().zip(&labels) {
        counts[l] += 1;
        for j in 0..q {
            sums[l][j] += p[j];
        }
    }
    let centroids: Vec<Vec<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s.iter().map(|x| x / c as f64).collect())
        .collect();
    let scaled: Vec<Vec<f64>> = match representative {
        Representative::Centroid => centroids,
        Representative::NearestCandidate => centroids
            .iter()
            .enumerate()
            .map(|(l, c)| {
                let mut best = (f64::INFINITY, 0);
                for (i, p) in cloud.points.iter().enumerate() {
                    if labels[i] != l {
                        continue;
                    }
                    let d: f64 = p.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d < best.0 {
                        best = (d, i);
                    }
                }
                cloud.points[best.1].clone()
            })
            .collect(),
    };
    let mut factors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for (i, s) in scaled.iter().enumerate() {
        let b = region.backsolve_scaled(s);
        if b.residual > DEFAULT_TOL {
            return Err(DesignError::Backsolve {
                index: i,
                residual: b.residual,
            });
        }
        factors.push(b.v);
        residuals.push(b.residual);
    }
    Ok(FffDesign {
        scaled,
        factors,
        residuals,
        labels,
    })
}

/// Mean nearest-neighbour distance within a point set.
pub fn mean_nearest_neighbor(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut best = f64::INFINITY;
        for j in 0..n {
            if i != j {
                let d: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                best = best.min(d);
            }
        }
        total += best.sqrt();
    }
    total / n as f64
}

/// Smallest pairwise distance within a point set.
pub fn min_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.min(d);
        }
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FactorBox, LogPiMap};
    use nalgebra::{DMatrix, DVector};

    fn square() -> PiRegion {
        let map = LogPiMap::new(DMatrix::identity(2, 2), DVector::zeros(2), vec!["a".into(), "b".into()]);
        let b = FactorBox::new(vec!["x".into(), "y".into()], vec![1.0, 1.0], vec![2.0, 3.0]).unwrap();
        PiRegion::new(map, b).unwrap()
    }

    #[test]
    fn full_cube_accepts_everything() {
        let c = rejection_sample(&square(), 500, 3, DEFAULT_PROPOSAL_BUDGET).unwrap();
        assert_eq!(c.points.len(), 500);
        assert_eq!(c.acceptance_rate, 1.0);
        assert_eq!(c.proposed, 500);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = rejection_sample(&square(), 5000, 11, DEFAULT_PROPOSAL_BUDGET).unwrap();
        let b = rejection_sample(&square(), 5000, 11, DEFAULT_PROPOSAL_BUDGET).unwrap();
        assert_eq!(a.points, b.points);
        let c = rejection_sample(&square(), 5000, 12, DEFAULT_PROPOSAL_BUDGET).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn ward_on_two_obvious_groups() {
        let pts = vec![vec![0.0], vec![0.1], vec![5.0], vec![5.2], vec![0.05]];
        let merges = ward_merges(&pts);
        assert_eq!(merges.len(), 4);
        let labels = cut_dendrogram(5, &merges, 2);
        assert_eq!(labels, vec![0, 0, 1, 1, 0]);
        assert_eq!(cut_dendrogram(5, &merges, 5), vec![0, 1, 2, 3, 4]);
        assert_eq!(cut_dendrogram(5, &merges, 1), vec![0; 5]);
    }

    #[test]
    fn every_cut_level_yields_k_clusters() {
        let c = rejection_sample(&square(), 300, 5, DEFAULT_PROPOSAL_BUDGET).unwrap();
        let merges = ward_merges(&c.points);
        for k in [1, 2, 7, 50, 300] {
            let labels = cut_dendrogram(300, &merges, k);
            assert_eq!(*labels.iter().max().unwrap() + 1, k);
        }
    }

    #[test]
    fn single_cluster_is_cloud_centroid() {
        let r = square();
        let c = rejection_sample(&r, 200, 1, DEFAULT_PROPOSAL_BUDGET).unwrap();
        let d = fff_select(&r, &c, 1, Representative::Centroid).unwrap();
        for j in 0..2 {
            let m: f64 = c.points.iter().map(|p| p[j]).sum::<f64>() / 200.0;
            assert!((d.scaled[0][j] - m).abs() < 1e-12);
        }
    }

    #[test]
    fn singleton_clusters_reproduce_cloud() {
        let r = square();
        let c = rejection_sample(&r, 60, 1, DEFAULT_PROPOSAL_BUDGET).unwrap();
        let d = fff_select(&r, &c, 60, Representative::Centroid).unwrap();
        assert_eq!(d.scaled, c.points);
        let e = fff_select(&r, &c, 10, Representative::NearestCandidate).unwrap();
        for p in &e.scaled {
            assert!(c.points.contains(p));
        }
    }
}
