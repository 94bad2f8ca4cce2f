use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DimError {
    #[error("quantity {quantity:?} has {found} dimension exponents, expected {expected}")]
    DimensionCount {
        quantity: String,
        expected: usize,
        found: usize,
    },
    #[error("no usable responses: every response was excluded")]
    NoUsableResponses { excluded: Vec<usize> },
    #[error("response #{0} cannot be made dimensionless")]
    UnsolvableResponse(usize),
    #[error("variable {variable:?} cannot eliminate dimension {dimension:?}")]
    CannotEliminate { dimension: String, variable: String },
    #[error("elimination order leaves dimensions {0:?} in the table")]
    IncompleteElimination(Vec<String>),
    #[error("non-positive scale factor {0}")]
    NonPositiveScale(f64),
    #[error("group {0:?} is not dimensionless")]
    NotDimensionless(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("point component {index} = {value} is outside [{lo}, {hi}]")]
    OutsideBox { index: usize, value: f64, lo: f64, hi: f64 },
    #[error("expected {expected} coordinates, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("{0} factors is too many for vertex enumeration (limit 20); sample the box instead")]
    TooManyFactors(usize),
    #[error("degenerate pi coordinate {0}: constant over the factor box")]
    DegenerateCoordinate(usize),
    #[error("box-constrained solve did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum DesignError {
    #[error(transparent)]
    Dim(#[from] DimError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("no nonsingular starting design after {attempts} attempts; try a larger n (n = {n}, largest model has {m} terms)")]
    NoNonsingularStart { attempts: usize, n: usize, m: usize },
    #[error("design has {n} runs but the model needs at least {m}")]
    TooFewRuns { n: usize, m: usize },
    #[error("rejection sampling exhausted {proposed} proposals with {accepted} accepted (rate {rate:e})")]
    ProposalBudget { proposed: u64, accepted: usize, rate: f64 },
    #[error("acceptance rate {0:e} is below 1e-4")]
    LowAcceptance(f64),
    #[error("backsolve residual {residual:e} exceeds tolerance for design point {index}")]
    Backsolve { index: usize, residual: f64 },
    #[error("design is singular for model {0}")]
    Singular(usize),
    #[error("{0}")]
    Invalid(String),
}
