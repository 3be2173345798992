use nalgebra::DMatrix;
use num_complex::Complex64;

use super::TruncatedSpace;
use crate::error::{Error, Result};

/// Truncated `(a_m, a_m†)` embedded in the full product space,
/// `a|n⟩ = √n |n-1⟩`.
pub fn ladder_ops(
    space: &TruncatedSpace,
    mode: usize,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    space.check_mode(mode)?;
    let d = space.dim();
    let stride = space.stride(mode);
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        let n = space.occupation(i, mode);
        if n > 0 {
            a[(i - stride, i)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
    }
    let adag = a.adjoint();
    Ok((a, adag))
}

/// Selective pair `(|ℓ⟩⟨ℓ+1|, |ℓ+1⟩⟨ℓ|)` on one mode, identity on the rest.
pub fn selective_ops(
    space: &TruncatedSpace,
    mode: usize,
    ell: usize,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    space.check_mode(mode)?;
    let cutoff = space.cutoffs()[mode];
    if ell + 1 >= cutoff {
        return Err(Error::invalid(
            "selective subspace",
            format!("ell = {ell} needs a cutoff above {}, mode {mode} has {cutoff}", ell + 1),
        ));
    }
    let d = space.dim();
    let stride = space.stride(mode);
    let mut lower = DMatrix::zeros(d, d);
    for i in 0..d {
        if space.occupation(i, mode) == ell + 1 {
            lower[(i - stride, i)] = Complex64::new(1.0, 0.0);
        }
    }
    let raise = lower.adjoint();
    Ok((lower, raise))
}

pub fn number_op(space: &TruncatedSpace, mode: usize) -> Result<DMatrix<Complex64>> {
    space.check_mode(mode)?;
    let d = space.dim();
    Ok(DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(space.occupation(i, mode) as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}
