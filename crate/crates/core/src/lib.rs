//! Dimensional analysis and experimental design on dimensionless regions.
//!
//! The crate is organised bottom-up:
//!
//! * [`rational`], [`dimension`], [`ipsen`], [`units`]: exact derivation of
//!   dimensionless predictor and response groups.
//! * [`geometry`], [`bvls`]: the factor box, the log-π region it induces,
//!   membership tests and back-solving design points to factor settings.
//! * [`poly`], [`criterion`], [`exchange`], [`sweep`]: polynomial models,
//!   information matrices, I-criteria and coordinate-exchange search.
//! * [`uniform`]: rejection sampling and Fast Flexible Filling designs.
//! * [`robust`]: compound designs that stay efficient for an empirical model
//!   in the original factors.
//! * [`problem`], [`pipeline`], [`export`]: problem files, end-to-end setup
//!   and CSV/text output.

pub mod bvls;
pub mod criterion;
pub mod dimension;
pub mod error;
pub mod exchange;
pub mod export;
pub mod geometry;
pub mod ipsen;
pub mod pipeline;
pub mod poly;
pub mod problem;
pub mod rational;
pub mod robust;
pub mod sweep;
pub mod uniform;
pub mod units;

pub use error::{DesignError, DimError, GeometryError};
