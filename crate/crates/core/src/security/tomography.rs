use serde::Serialize;

use crate::operators::DensityOperator;
use crate::pauli::pauli_coefficients;
use crate::{Error, Result};

/// Pauli-expectation comparison of two states on `2^n` dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TomographyBound {
    /// `(1/2) max_J |a_IJ − a_KJ|`, achievable by measuring one product Pauli locally.
    pub lower: f64,
    /// `Σ_J |a_IJ − a_KJ|`, an upper bound on `‖ω_I − ω_K‖₁`.
    pub coefficient_sum: f64,
    /// `d² max_J |a_IJ − a_KJ|`.
    pub chain_value: f64,
    pub max_difference: f64,
}

/// Tomographic LOCC lower bound from Pauli coefficients `a_J = Tr(σ_J ω)`.
pub fn dist_tomography_lower(omega_i: &DensityOperator, omega_k: &DensityOperator) -> Result<TomographyBound> {
    if omega_i.dim() != omega_k.dim() {
        return Err(Error::Shape(format!(
            "states of dimension {} and {}",
            omega_i.dim(),
            omega_k.dim()
        )));
    }
    let a = pauli_coefficients(omega_i)?;
    let b = pauli_coefficients(omega_k)?;
    let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).collect();
    let max_difference = diffs.iter().copied().fold(0.0, f64::max);
    let d = omega_i.dim() as f64;
    Ok(TomographyBound {
        lower: 0.5 * max_difference,
        coefficient_sum: diffs.iter().sum(),
        chain_value: d * d * max_difference,
        max_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{HilbertLayout, PureState};

    #[test]
    fn computational_states() {
        let layout = HilbertLayout::single("q", 2).unwrap();
        let zero = PureState::basis(layout.clone(), 0).unwrap().projector();
        let one = PureState::basis(layout, 1).unwrap().projector();
        let t = dist_tomography_lower(&zero, &one).unwrap();
        assert!((t.lower - 1.0).abs() < 1e-14);
        assert_eq!(dist_tomography_lower(&zero, &zero).unwrap().lower, 0.0);
    }
}
