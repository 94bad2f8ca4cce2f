//! Change of unit system for power-law quantities.

use crate::dimension::DimVector;
use crate::error::DimError;
use crate::rational::to_f64;

/// Converts `value` when the unit of base dimension `i` grows by `scale[i]`:
/// `x' = x * Π c_i^(-b_i)`.
pub fn unit_rescale(value: f64, dim: &DimVector, scale: &[f64]) -> Result<f64, DimError> {
    if scale.len() != dim.len() {
        return Err(DimError::Invalid(format!(
            "{} scale factors for {} base dimensions",
            scale.len(),
            dim.len()
        )));
    }
    if let Some(&bad) = scale.iter().find(|&&c| !(c > 0.0 && c.is_finite())) {
        return Err(DimError::NonPositiveScale(bad));
    }
    let log_c: f64 = dim
        .exponents()
        .iter()
        .zip(scale)
        .map(|(b, c)| to_f64(b) * c.ln())
        .sum();
    Ok(value * (-log_c).exp())
}
