//! From a loaded problem file to a design region and response models.

use crate::criterion::{moment_matrix_from_cloud, MomentMatrix};
use crate::dimension::{derive_model, DAModel, PiGroup};
use crate::error::{DesignError, GeometryError};
use crate::exchange::{Block, DesignProblem, Space};
use crate::geometry::{FactorBox, LogPiMap, PiRegion};
use crate::poly::PolynomialModel;
use crate::problem::LoadedProblem;
use crate::uniform::{rejection_sample, CandidateCloud, DEFAULT_PROPOSAL_BUDGET};

pub const DEFAULT_ORDER: usize = 3;

/// Region and models ready for design construction.
#[derive(Debug, Clone)]
pub struct DesignSetup {
    pub derived: DAModel,
    /// Design groups that vary over the box, in region coordinate order.
    pub groups: Vec<PiGroup>,
    pub region: PiRegion,
    /// One model per response, over region coordinates.
    pub models: Vec<PolynomialModel>,
    pub warnings: Vec<String>,
}

/// Order used for response `i`: per-response list, then the model file
/// entry, then `default`.
fn order_for(i: usize, per_response: Option<&[usize]>, file: Option<usize>, default: usize) -> usize {
    per_response
        .and_then(|o| o.get(i).copied())
        .or(file)
        .unwrap_or(default)
}

pub fn build_setup(
    loaded: &LoadedProblem,
    default_order: usize,
    per_response: Option<&[usize]>,
) -> Result<DesignSetup, DesignError> {
    let problem = &loaded.problem;
    let derived = derive_model(problem)?;
    let mut warnings = Vec::new();
    let candidates: Vec<(PiGroup, bool)> = match &loaded.design_groups {
        Some(gs) => gs.iter().map(|g| (g.group.clone(), true)).collect(),
        None => derived.predictor_groups.iter().map(|g| (g.clone(), false)).collect(),
    };
    if candidates.is_empty() {
        return Err(DesignError::Invalid("no dimensionless predictor groups to design over".into()));
    }
    let all: Vec<PiGroup> = candidates.iter().map(|(g, _)| g.clone()).collect();
    let full_map = LogPiMap::from_groups(problem, &all)?;
    let zero = full_map.zero_rows();
    let mut keep_index = vec![None; all.len()];
    let mut groups = Vec::new();
    for (i, g) in all.iter().enumerate() {
        if zero.contains(&i) {
            warnings.push(format!(
                "group {} does not vary over the factor box and is dropped from the design",
                g.name
            ));
            continue;
        }
        keep_index[i] = Some(groups.len());
        groups.push(g.clone());
    }
    if groups.is_empty() {
        return Err(DesignError::Geometry(GeometryError::DegenerateCoordinate(0)));
    }
    let map = LogPiMap::from_groups(problem, &groups)?;
    let rank = map.u.rank(1e-10 * map.u.norm().max(1.0));
    if rank < map.q() {
        return Err(DesignError::Invalid(format!(
            "design groups are log-linearly dependent over the varying factors (rank {rank} < {})",
            map.q()
        )));
    }
    let region = PiRegion::new(map, FactorBox::from_problem(problem)?)?;

    let q = groups.len();
    let mut models = Vec::new();
    if loaded.models.is_empty() {
        for (i, g) in derived.response_groups.iter().enumerate() {
            let order = order_for(i, per_response, None, default_order);
            models.push(PolynomialModel::full(&g.name, q, order));
        }
    } else {
        for (i, m) in loaded.models.iter().enumerate() {
            let order = order_for(i, per_response, m.order, default_order);
            let subset: Vec<usize> = if m.factors.is_empty() {
                (0..q).collect()
            } else {
                let mut s = Vec::new();
                for &f in &m.factors {
                    match keep_index[f] {
                        Some(j) => s.push(j),
                        None => warnings.push(format!("model {} loses constant factor {}", m.name, all[f].name)),
                    }
                }
                s
            };
            models.push(PolynomialModel::new(&m.name, subset, order));
        }
    }
    if models.is_empty() {
        return Err(DesignError::Invalid("no response models to design for".into()));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(DesignSetup {
        derived,
        groups,
        region,
        models,
        warnings,
    })
}

impl DesignSetup {
    pub fn group_names(&self) -> Vec<String> {
        self.groups.iter().map(|g| g.name.clone()).collect()
    }

    /// Uniform sample of the region shared by every moment estimate.
    pub fn cloud(&self, samples: usize, seed: u64) -> Result<CandidateCloud, DesignError> {
        rejection_sample(&self.region, samples, seed, DEFAULT_PROPOSAL_BUDGET)
    }

    pub fn moments(&self, cloud: &CandidateCloud) -> Vec<MomentMatrix> {
        self.models.iter().map(|m| moment_matrix_from_cloud(m, cloud)).collect()
    }

    /// Design problem with one log-π block per response model.
    pub fn design_problem(&self, moments: Vec<MomentMatrix>) -> DesignProblem {
        DesignProblem {
            region: self.region.clone(),
            blocks: self
                .models
                .iter()
                .cloned()
                .zip(moments)
                .map(|(model, moments)| Block {
                    model,
                    space: Space::Pi,
                    moments,
                })
                .collect(),
        }
    }
}
