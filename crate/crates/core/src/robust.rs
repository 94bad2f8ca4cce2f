//! Compound designs that stay efficient both for a model on the log-π region
//! and for an empirical polynomial in the original factors.
//!
//! `c(ξ, w) = w E_π(ξ) + (1 - w) E_χ(ξ)`, maximized by coordinate exchange,
//! with `w` chosen by maximin over a grid.

use crate::criterion::{cube_moment_matrix, efficiency_from_traces, MomentMatrix};
use crate::error::DesignError;
use crate::exchange::{
    coordinate_exchange, Block, Design, DesignProblem, ExchangeOptions, ExchangeResult, Objective, Space,
};
use crate::export::numeric_csv;
use crate::geometry::PiRegion;
use crate::poly::PolynomialModel;
use crate::sweep::{efficiencies_against_best, maximin_index};
use rayon::prelude::*;
use serde::Serialize;

pub const DEFAULT_EMPIRICAL_ORDER: usize = 2;

/// Two blocks: the model on scaled log-π coordinates, then a full
/// polynomial of `empirical_order` in the linearly scaled factors.
pub fn robust_problem(
    region: PiRegion,
    da_model: PolynomialModel,
    da_moments: MomentMatrix,
    empirical_order: usize,
) -> DesignProblem {
    let empirical = PolynomialModel::full("empirical", region.p(), empirical_order);
    let chi_moments = cube_moment_matrix(&empirical);
    DesignProblem {
        region,
        blocks: vec![
            Block {
                model: da_model,
                space: Space::Pi,
                moments: da_moments,
            },
            Block {
                model: empirical,
                space: Space::Chi,
                moments: chi_moments,
            },
        ],
    }
}

/// `w E_π + (1 - w) E_χ` from traces; a singular block contributes zero.
pub fn compound_criterion(traces: [f64; 2], references: [f64; 2], w: f64) -> f64 {
    w * efficiency_from_traces(references[0], traces[0]) + (1.0 - w) * efficiency_from_traces(references[1], traces[1])
}

pub fn compound_criterion_of(problem: &DesignProblem, design: &Design, references: [f64; 2], w: f64) -> f64 {
    let t = problem.traces(design);
    compound_criterion([t[0], t[1]], references, w)
}

/// Optimal designs for each block alone; their traces are the efficiency
/// denominators.
#[derive(Debug, Clone)]
pub struct RobustReferences {
    pub traces: [f64; 2],
    pub designs: [Design; 2],
}

pub fn robust_references(problem: &DesignProblem, opts: &ExchangeOptions) -> Result<RobustReferences, DesignError> {
    let pi = coordinate_exchange(problem, &Objective::Weighted(vec![1.0, 0.0]), opts)?;
    let chi = coordinate_exchange(
        problem,
        &Objective::Weighted(vec![0.0, 1.0]),
        &ExchangeOptions {
            stream_base: opts.stream_base + opts.starts as u64,
            ..opts.clone()
        },
    )?;
    Ok(RobustReferences {
        traces: [pi.traces[0], chi.traces[1]],
        designs: [pi.design, chi.design],
    })
}

/// Coordinate exchange maximizing `c(ξ, w)`. The returned history holds
/// `-c` after each accepted move.
pub fn robust_exchange(
    problem: &DesignProblem,
    w: f64,
    references: [f64; 2],
    opts: &ExchangeOptions,
) -> Result<ExchangeResult, DesignError> {
    if !(0.0..=1.0).contains(&w) {
        return Err(DesignError::Invalid(format!("compound weight {w} outside [0, 1]")));
    }
    let objective = Objective::Compound {
        weights: vec![w, 1.0 - w],
        references: references.to_vec(),
    };
    coordinate_exchange(problem, &objective, opts)
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustPoint {
    pub w: f64,
    pub traces: [f64; 2],
    /// `(E_π, E_χ)`.
    pub efficiencies: [f64; 2],
    #[serde(skip)]
    pub design: Design,
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustResult {
    pub points: Vec<RobustPoint>,
    pub references: [f64; 2],
    pub maximin: usize,
}

impl RobustResult {
    pub fn maximin_point(&self) -> &RobustPoint {
        &self.points[self.maximin]
    }

    /// `w,E_pi,E_chi,min_E` rows.
    pub fn to_csv(&self) -> String {
        let headers: Vec<String> = ["w", "E_pi", "E_chi", "min_E"].iter().map(|s| s.to_string()).collect();
        let rows: Vec<Vec<f64>> = self
            .points
            .iter()
            .map(|p| {
                vec![
                    p.w,
                    p.efficiencies[0],
                    p.efficiencies[1],
                    p.efficiencies[0].min(p.efficiencies[1]),
                ]
            })
            .collect();
        numeric_csv(&headers, &rows)
    }
}

/// Compound designs over `grid`; efficiencies use the best trace seen for
/// each block across the references and the whole grid.
/// Grid point `g` uses RNG streams starting at `(g + 2) * opts.starts`.
pub fn maximin_over_w(
    problem: &DesignProblem,
    grid: &[f64],
    references: &RobustReferences,
    opts: &ExchangeOptions,
) -> Result<RobustResult, DesignError> {
    let runs: Vec<Result<(f64, Design, [f64; 2]), DesignError>> = grid
        .par_iter()
        .enumerate()
        .map(|(g, &w)| {
            let o = ExchangeOptions {
                stream_base: opts.stream_base + ((g + 2) * opts.starts) as u64,
                ..opts.clone()
            };
            let r = robust_exchange(problem, w, references.traces, &o)?;
            Ok((w, r.design, [r.traces[0], r.traces[1]]))
        })
        .collect();
    let runs: Vec<(f64, Design, [f64; 2])> = runs.into_iter().collect::<Result<_, _>>()?;
    let traces: Vec<[f64; 2]> = runs.iter().map(|r| r.2).collect();
    let (refs, eff) = efficiencies_against_best(&traces, references.traces);
    let maximin = maximin_index(&eff);
    let points = runs
        .into_iter()
        .zip(eff)
        .map(|((w, design, traces), efficiencies)| RobustPoint {
            w,
            traces,
            efficiencies,
            design,
        })
        .collect();
    Ok(RobustResult {
        points,
        references: refs,
        maximin,
    })
}
