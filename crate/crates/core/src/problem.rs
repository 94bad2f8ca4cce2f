//! JSON problem files.
//!
//! ```json
//! {
//!   "name": "pump",
//!   "dimensions": ["L", "M", "T"],
//!   "quantities": [
//!     {"name": "gH", "role": "response", "dimension": {"L": "2", "T": "-2"}},
//!     {"name": "Q", "role": "predictor", "dimension": {"L": "3", "T": "-1"}, "range": [4, 30]},
//!     {"name": "rho", "role": "constant", "dimension": {"M": "1", "L": "-3"}, "value": 998.0}
//!   ],
//!   "elimination_order": [["M", "rho"], ["T", "s"], ["L", "D"]],
//!   "design": {
//!     "groups": [{"name": "C_Q", "exponents": {"Q": "1", "s": "-1", "D": "-3"}}],
//!     "models": [{"name": "head", "factors": ["C_Q"]}]
//!   }
//! }
//! ```
//!
//! Exponents are strings holding exact rationals (`"-1/2"`); integers are
//! also accepted as JSON numbers. Roles are `response`, `predictor` and
//! `constant` (alias `held-constant`).

use crate::dimension::{DAProblem, DimVector, GroupKind, PiGroup, Quantity, Role};
use crate::error::DimError;
use crate::ipsen::EliminationOrder;
use crate::rational::{parse_rational, Rational};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentSpec {
    Text(String),
    Integer(i64),
}

impl ExponentSpec {
    fn parse(&self) -> Result<Rational, String> {
        match self {
            ExponentSpec::Text(s) => parse_rational(s),
            ExponentSpec::Integer(i) => Ok(crate::rational::int(*i)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantitySpec {
    pub name: String,
    pub role: String,
    #[serde(default)]
    pub dimension: BTreeMap<String, ExponentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub name: String,
    pub exponents: BTreeMap<String, ExponentSpec>,
    /// Optional well-known name, e.g. "Reynolds number".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    /// Names of the design groups this response depends on; all when absent.
    #[serde(default)]
    pub factors: Option<Vec<String>>,
    #[serde(default)]
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    /// Design factors in dimensionless space. Defaults to the derived
    /// predictor groups.
    #[serde(default)]
    pub groups: Vec<GroupSpec>,
    /// One polynomial model per dimensionless response.
    #[serde(default)]
    pub models: Vec<ModelSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    pub dimensions: Vec<String>,
    pub quantities: Vec<QuantitySpec>,
    /// `[dimension, variable]` pairs for the stepwise tableau.
    #[serde(default)]
    pub elimination_order: Option<Vec<[String; 2]>>,
    #[serde(default)]
    pub design: Option<DesignSpec>,
}

/// A named design group resolved against the problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignGroup {
    pub group: PiGroup,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedModel {
    pub name: String,
    /// Indices into the design groups.
    pub factors: Vec<usize>,
    pub order: Option<usize>,
}

/// Parsed and validated problem file.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub problem: DAProblem,
    pub elimination_order: Option<EliminationOrder>,
    pub design_groups: Option<Vec<DesignGroup>>,
    pub models: Vec<ResolvedModel>,
    pub description: Option<String>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, DimError> {
        serde_json::from_str(text).map_err(|e| {
            DimError::Invalid(format!("schema error at line {} column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> Result<LoadedProblem, DimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DimError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)?.resolve()
    }

    pub fn resolve(&self) -> Result<LoadedProblem, DimError> {
        let k = self.dimensions.len();
        let mut quantities = Vec::with_capacity(self.quantities.len());
        for q in &self.quantities {
            let mut exps = vec![Rational::zero(); k];
            for (dim, e) in &q.dimension {
                let d = self.dimensions.iter().position(|x| x == dim).ok_or_else(|| {
                    DimError::Invalid(format!("quantity {:?}: unknown dimension {dim:?}", q.name))
                })?;
                exps[d] = e
                    .parse()
                    .map_err(|m| DimError::Invalid(format!("quantity {:?}: {m}", q.name)))?;
            }
            let role = match q.role.as_str() {
                "response" => Role::Response,
                "predictor" => Role::Predictor,
                "constant" | "held-constant" => Role::Constant,
                other => {
                    return Err(DimError::Invalid(format!(
                        "quantity {:?}: unknown role {other:?}",
                        q.name
                    )))
                }
            };
            quantities.push(Quantity {
                name: q.name.clone(),
                dim: DimVector::new(exps),
                role,
                range: q.range.map(|[a, b]| (a, b)),
                value: q.value,
                description: q.description.clone(),
            });
        }
        let problem = DAProblem::new(&self.name, self.dimensions.clone(), quantities)?;

        let elimination_order = match &self.elimination_order {
            None => None,
            Some(pairs) => {
                let mut order = Vec::new();
                for [dim, var] in pairs {
                    let d = problem
                        .dimension_index(dim)
                        .ok_or_else(|| DimError::Invalid(format!("elimination order: unknown dimension {dim:?}")))?;
                    let v = problem
                        .index_of(var)
                        .ok_or_else(|| DimError::Invalid(format!("elimination order: unknown variable {var:?}")))?;
                    order.push((d, v));
                }
                Some(order)
            }
        };

        let (design_groups, models) = match &self.design {
            None => (None, Vec::new()),
            Some(spec) => {
                let groups = if spec.groups.is_empty() {
                    None
                } else {
                    Some(
                        spec.groups
                            .iter()
                            .map(|g| resolve_group(&problem, g))
                            .collect::<Result<Vec<_>, _>>()?,
                    )
                };
                let names: Option<Vec<String>> =
                    groups.as_ref().map(|gs: &Vec<DesignGroup>| gs.iter().map(|g| g.group.name.clone()).collect());
                let mut models = Vec::new();
                for m in &spec.models {
                    let factors = match (&m.factors, &names) {
                        (None, _) => Vec::new(),
                        (Some(fs), Some(names)) => fs
                            .iter()
                            .map(|f| {
                                names.iter().position(|n| n == f).ok_or_else(|| {
                                    DimError::Invalid(format!("model {:?}: unknown design group {f:?}", m.name))
                                })
                            })
                            .collect::<Result<Vec<_>, _>>()?,
                        (Some(_), None) => {
                            return Err(DimError::Invalid(format!(
                                "model {:?} lists factors but no design groups are declared",
                                m.name
                            )))
                        }
                    };
                    models.push(ResolvedModel {
                        name: m.name.clone(),
                        factors,
                        order: m.order,
                    });
                }
                (groups, models)
            }
        };

        Ok(LoadedProblem {
            problem,
            elimination_order,
            design_groups,
            models,
            description: self.description.clone(),
        })
    }
}

fn resolve_group(problem: &DAProblem, spec: &GroupSpec) -> Result<DesignGroup, DimError> {
    let mut exps = vec![Rational::zero(); problem.quantities.len()];
    for (name, e) in &spec.exponents {
        let idx = problem
            .index_of(name)
            .ok_or_else(|| DimError::Invalid(format!("group {:?}: unknown quantity {name:?}", spec.name)))?;
        if problem.quantities[idx].role == Role::Response {
            return Err(DimError::Invalid(format!(
                "design group {:?} may not involve response {name:?}",
                spec.name
            )));
        }
        exps[idx] = e
            .parse()
            .map_err(|m| DimError::Invalid(format!("group {:?}: {m}", spec.name)))?;
    }
    let group = PiGroup {
        name: spec.name.clone(),
        kind: GroupKind::Predictor,
        response_index: None,
        exponents: exps,
    };
    if !group.is_dimensionless(problem) {
        return Err(DimError::NotDimensionless(spec.name.clone()));
    }
    Ok(DesignGroup {
        group,
        label: spec.label.clone(),
    })
}
