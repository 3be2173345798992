use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{DensityOperator, StateVector};

/// `F = √⟨ψ|ρ|ψ⟩`, the square-root convention.
pub fn fidelity(rho: &DensityOperator, target: &StateVector) -> Result<f64> {
    if rho.basis() != target.basis() {
        return Err(Error::BasisMismatch {
            expected: rho.basis(),
            found: target.basis(),
        });
    }
    if rho.dim() != target.amplitudes().len() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: target.amplitudes().len(),
        });
    }
    if !target.is_normalized() {
        return Err(Error::invalid(
            "target state",
            format!("norm is {}, expected 1", target.norm()),
        ));
    }
    let psi = target.amplitudes();
    let overlap: Complex64 = psi.dotc(&(rho.matrix() * psi));
    Ok(overlap.re.clamp(0.0, 1.0).sqrt())
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityOperator) -> f64 {
    let m = rho.matrix();
    let d = m.nrows();
    let mut acc = 0.0;
    for j in 0..d {
        for i in 0..d {
            acc += (m[(i, j)] * m[(j, i)]).re;
        }
    }
    acc
}
