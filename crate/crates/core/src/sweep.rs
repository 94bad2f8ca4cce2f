//! Two-response weight sweeps and maximin weight selection.

use crate::criterion::efficiency_from_traces;
use crate::error::DesignError;
use crate::exchange::{coordinate_exchange, Design, DesignProblem, ExchangeOptions, Objective};
use crate::export::numeric_csv;
use rayon::prelude::*;
use serde::Serialize;

/// `points` evenly spaced values from 0 to 1.
pub fn weight_grid(points: usize) -> Vec<f64> {
    assert!(points >= 2);
    (0..points).map(|i| i as f64 / (points - 1) as f64).collect()
}

/// Default 21-point grid with step 0.05.
pub fn default_grid() -> Vec<f64> {
    weight_grid(21)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub w1: f64,
    pub traces: [f64; 2],
    pub efficiencies: [f64; 2],
    #[serde(skip)]
    pub design: Design,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Smallest trace observed for each model over the whole sweep.
    pub references: [f64; 2],
    pub maximin: usize,
}

impl SweepResult {
    pub fn maximin_point(&self) -> &SweepPoint {
        &self.points[self.maximin]
    }

    /// `w1,trace1,trace2,E1,E2,min_E` rows.
    pub fn to_csv(&self) -> String {
        let headers: Vec<String> = ["w1", "trace1", "trace2", "E1", "E2", "min_E"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let rows: Vec<Vec<f64>> = self
            .points
            .iter()
            .map(|p| {
                vec![
                    p.w1,
                    p.traces[0],
                    p.traces[1],
                    p.efficiencies[0],
                    p.efficiencies[1],
                    p.efficiencies[0].min(p.efficiencies[1]),
                ]
            })
            .collect();
        numeric_csv(&headers, &rows)
    }
}

/// Index of the largest `min(E1, E2)`; ties go to the first.
pub fn maximin_index(efficiencies: &[[f64; 2]]) -> usize {
    let mut best = 0;
    for (i, e) in efficiencies.iter().enumerate() {
        if e[0].min(e[1]) > efficiencies[best][0].min(efficiencies[best][1]) {
            best = i;
        }
    }
    best
}

/// Efficiencies against the best trace seen anywhere in the sweep, so no
/// value exceeds one.
pub fn efficiencies_against_best(traces: &[[f64; 2]], seed_refs: [f64; 2]) -> ([f64; 2], Vec<[f64; 2]>) {
    let mut refs = seed_refs;
    for t in traces {
        for k in 0..2 {
            if t[k].is_finite() && t[k] < refs[k] {
                refs[k] = t[k];
            }
        }
    }
    let eff = traces
        .iter()
        .map(|t| [efficiency_from_traces(refs[0], t[0]), efficiency_from_traces(refs[1], t[1])])
        .collect();
    (refs, eff)
}

/// Optimal designs for `w1 * Trace_1 + (1 - w1) * Trace_2` at each grid value.
/// Grid point `g` uses RNG streams starting at `g * opts.starts`.
pub fn weight_sweep(problem: &DesignProblem, grid: &[f64], opts: &ExchangeOptions) -> Result<SweepResult, DesignError> {
    if problem.blocks.len() != 2 {
        return Err(DesignError::Invalid(format!(
            "a weight sweep needs exactly two response models, found {}",
            problem.blocks.len()
        )));
    }
    if grid.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(DesignError::Invalid("weights must lie in [0, 1]".into()));
    }
    let runs: Vec<Result<(f64, Design, [f64; 2]), DesignError>> = grid
        .par_iter()
        .enumerate()
        .map(|(g, &w1)| {
            let o = ExchangeOptions {
                stream_base: opts.stream_base + (g * opts.starts) as u64,
                ..opts.clone()
            };
            let r = coordinate_exchange(problem, &Objective::Weighted(vec![w1, 1.0 - w1]), &o)?;
            Ok((w1, r.design, [r.traces[0], r.traces[1]]))
        })
        .collect();
    let runs: Vec<(f64, Design, [f64; 2])> = runs.into_iter().collect::<Result<_, _>>()?;
    let traces: Vec<[f64; 2]> = runs.iter().map(|r| r.2).collect();
    let (references, eff) = efficiencies_against_best(&traces, [f64::INFINITY; 2]);
    let maximin = maximin_index(&eff);
    let points = runs
        .into_iter()
        .zip(eff)
        .map(|((w1, design, traces), efficiencies)| SweepPoint {
            w1,
            traces,
            efficiencies,
            design,
        })
        .collect();
    Ok(SweepResult {
        points,
        references,
        maximin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_expected_steps() {
        let g = default_grid();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[20], 1.0);
        assert!((g[7] - 0.35).abs() < 1e-15);
    }

    #[test]
    fn maximin_prefers_balanced_point() {
        let e = [[1.0, 0.5], [0.9, 0.9], [0.5, 1.0], [0.9, 0.9]];
        assert_eq!(maximin_index(&e), 1);
    }

    #[test]
    fn references_never_exceeded() {
        let traces = [[2.0, 5.0], [2.5, 4.0], [1.9, 6.0]];
        let (refs, eff) = efficiencies_against_best(&traces, [f64::INFINITY; 2]);
        assert_eq!(refs, [1.9, 4.0]);
        assert!(eff.iter().flatten().all(|e| *e <= 1.0));
        assert_eq!(eff[2][0], 1.0);
    }
}
