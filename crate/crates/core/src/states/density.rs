use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{Basis, TruncatedSpace};
use crate::error::{Error, Result};

pub(crate) const HERMITIAN_TOL: f64 = 1e-10;
pub(crate) const TRACE_TOL: f64 = 1e-8;
pub(crate) const POSITIVITY_TOL: f64 = 1e-8;

/// Pure state on a truncated space, tagged with its mode basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: TruncatedSpace,
    amplitudes: DVector<Complex64>,
    basis: Basis,
}

impl StateVector {
    pub fn new(space: TruncatedSpace, amplitudes: DVector<Complex64>, basis: Basis) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(StateVector {
            space,
            amplitudes,
            basis,
        })
    }

    /// The Fock product `|n_1, ..., n_N⟩`.
    pub fn fock(space: &TruncatedSpace, occupations: &[usize], basis: Basis) -> Result<Self> {
        let idx = space.index(occupations)?;
        let mut amps = DVector::zeros(space.dim());
        amps[idx] = Complex64::new(1.0, 0.0);
        Self::new(space.clone(), amps, basis)
    }

    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-10
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::invalid("state vector", "cannot normalize a zero vector"));
        }
        self.amplitudes /= Complex64::new(n, 0.0);
        Ok(self)
    }

    pub fn amplitude(&self, occupations: &[usize]) -> Result<Complex64> {
        Ok(self.amplitudes[self.space.index(occupations)?])
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                found: other.amplitudes.len(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

/// Density matrix on a truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    space: TruncatedSpace,
    matrix: DMatrix<Complex64>,
    basis: Basis,
}

impl DensityOperator {
    /// Wraps a matrix after checking shape, Hermiticity and unit trace.
    /// Positivity is checked separately by [`DensityOperator::validate`].
    pub fn new(space: TruncatedSpace, matrix: DMatrix<Complex64>, basis: Basis) -> Result<Self> {
        let rho = Self::new_unchecked(space, matrix, basis)?;
        let herm = rho.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::invalid(
                "density operator",
                format!("not Hermitian (deviation {herm:.3e})"),
            ));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::invalid("density operator", format!("trace is {tr}")));
        }
        Ok(rho)
    }

    pub(crate) fn new_unchecked(
        space: TruncatedSpace,
        matrix: DMatrix<Complex64>,
        basis: Basis,
    ) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows(),
            });
        }
        Ok(DensityOperator {
            space,
            matrix,
            basis,
        })
    }

    pub fn pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        DensityOperator {
            space: psi.space().clone(),
            matrix: a * a.adjoint(),
            basis: psi.basis(),
        }
    }

    pub fn maximally_mixed(space: &TruncatedSpace, basis: Basis) -> Self {
        let d = space.dim();
        DensityOperator {
            space: space.clone(),
            matrix: DMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0)),
            basis,
        }
    }

    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.min()
    }

    /// Full invariant check: Hermitian, unit trace, positive semidefinite.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::invalid(
                "density operator",
                format!("not Hermitian (deviation {herm:.3e})"),
            ));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::invalid("density operator", format!("trace is {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::invalid(
                "density operator",
                format!("negative eigenvalue {min:.3e}"),
            ));
        }
        Ok(())
    }

    /// Diagonal of the matrix, i.e. Fock-state populations.
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn population(&self, occupations: &[usize]) -> Result<f64> {
        let i = self.space.index(occupations)?;
        Ok(self.matrix[(i, i)].re)
    }

    /// `⟨A_m† A_m⟩` for every mode.
    pub fn mean_occupations(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.space.n_modes()];
        for i in 0..self.dim() {
            let p = self.matrix[(i, i)].re;
            for (m, slot) in out.iter_mut().enumerate() {
                *slot += p * self.space.occupation(i, m) as f64;
            }
        }
        out
    }

    /// Single-mode reduced populations.
    pub fn mode_populations(&self, mode: usize) -> Result<Vec<f64>> {
        self.space.check_mode(mode)?;
        let mut out = vec![0.0; self.space.cutoffs()[mode]];
        for i in 0..self.dim() {
            out[self.space.occupation(i, mode)] += self.matrix[(i, i)].re;
        }
        Ok(out)
    }

    /// Trace norm `‖self - other‖₁` of the difference.
    pub fn trace_distance(&self, other: &DensityOperator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let diff = &self.matrix - &other.matrix;
        let h = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(SymmetricEigen::new(h).eigenvalues.iter().map(|x| x.abs()).sum())
    }
}
