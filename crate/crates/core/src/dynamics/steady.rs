use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::evolve::{evolve, EvolveOptions};
use crate::error::{Error, Result};
use crate::liouvillian::Liouvillian;
use crate::states::{Basis, DensityOperator};

type C = Complex64;

/// Largest `D²` handled by a dense SVD of the generator.
pub const DENSE_LIMIT: usize = 1024;
/// Largest `D²` handled by a direct solver at all; beyond it the steady
/// state is found by integration.
pub const DIRECT_LIMIT: usize = 40_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyStateMethod {
    /// Null space from the SVD of the dense generator.
    DenseNullSpace,
    /// Sparse LU with the trace condition replacing one equation.
    SparseLu,
    /// Long-time integration until stationary.
    Integration,
}

#[derive(Debug, Clone)]
pub struct SteadyStateOptions {
    /// Force a method instead of choosing by size.
    pub method: Option<SteadyStateMethod>,
    pub direct_tol: f64,
    pub integration_tol: f64,
    /// Horizon for the integration path, and for the reference run used to
    /// pick a state from a degenerate null space.
    pub t_final: f64,
    /// Starting point of any integration; maximally mixed if absent.
    pub initial: Option<DensityOperator>,
    /// Relative singular-value cutoff for the dense null space.
    pub null_tol: f64,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        SteadyStateOptions {
            method: None,
            direct_tol: 1e-8,
            integration_tol: 1e-6,
            t_final: 50.0,
            initial: None,
            null_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    pub rho: DensityOperator,
    /// `‖L[ρ]‖∞`, recomputed matrix-free.
    pub residual: f64,
    pub method: SteadyStateMethod,
    /// Null-space dimension, when the dense path measured it.
    pub null_dimension: Option<usize>,
    /// False when several stationary states exist; `rho` is then the
    /// projection of an integrated state onto the null space.
    pub unique: bool,
    /// Integration time used, if any.
    pub horizon: Option<f64>,
}

/// Stationary state of `L`, normalized to unit trace.
pub fn steady_state(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<SteadyStateResult> {
    let n = l.dim() * l.dim();
    let method = opts.method.unwrap_or(if n <= DENSE_LIMIT {
        SteadyStateMethod::DenseNullSpace
    } else if n <= DIRECT_LIMIT {
        SteadyStateMethod::SparseLu
    } else {
        SteadyStateMethod::Integration
    });
    let result = match method {
        SteadyStateMethod::DenseNullSpace => dense(l, opts)?,
        SteadyStateMethod::SparseLu => match sparse(l, opts) {
            Ok(r) => r,
            // a singular system means the stationary state is not unique
            Err(Error::Solver(_)) if opts.method.is_none() => dense_or_integrate(l, opts)?,
            Err(e) => return Err(e),
        },
        SteadyStateMethod::Integration => integrate(l, opts)?,
    };
    let tol = match result.method {
        SteadyStateMethod::Integration => opts.integration_tol,
        _ => opts.direct_tol,
    };
    if result.residual > tol {
        return Err(Error::Solver(format!(
            "{:?} residual {:.3e} exceeds {tol:.1e}",
            result.method, result.residual
        )));
    }
    Ok(result)
}

fn dense_or_integrate(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<SteadyStateResult> {
    if l.dim() * l.dim() <= DIRECT_LIMIT {
        dense(l, opts)
    } else {
        integrate(l, opts)
    }
}

fn initial_state(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<DensityOperator> {
    match &opts.initial {
        Some(rho) => {
            l.check_state(rho)?;
            Ok(rho.clone())
        }
        None => Ok(DensityOperator::maximally_mixed(l.space(), Basis::Normal)),
    }
}

fn from_vec(l: &Liouvillian, x: &[C]) -> Result<DensityOperator> {
    let d = l.dim();
    let m = DMatrix::from_column_slice(d, d, x);
    let tr = m.trace();
    if tr.norm() < 1e-300 {
        return Err(Error::Solver("stationary vector has zero trace".into()));
    }
    let m = m / tr;
    let m = (&m + m.adjoint()) * C::new(0.5, 0.0);
    DensityOperator::new_unchecked(l.space().clone(), m, Basis::Normal)
}

fn dense(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<SteadyStateResult> {
    let n = l.dim() * l.dim();
    let dense = l.to_dense();
    let a = Mat::<C>::from_fn(n, n, |i, j| dense[(i, j)]);
    let svd = a
        .svd()
        .map_err(|e| Error::Solver(format!("dense SVD failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let v = svd.V();
    let smax = (0..n).map(|i| s[i].re).fold(0.0, f64::max);
    let cut = opts.null_tol * smax.max(1.0);
    let null: Vec<usize> = (0..n).filter(|&i| s[i].re <= cut).collect();
    if null.is_empty() {
        return Err(Error::Solver("generator has no null space".into()));
    }
    // right singular vectors spanning the null space
    let basis: Vec<DVector<C>> = null
        .iter()
        .map(|&k| DVector::from_fn(n, |i, _| v[(i, k)]))
        .collect();

    let (rho, unique, horizon) = if basis.len() == 1 {
        (from_vec(l, basis[0].as_slice())?, true, None)
    } else {
        let reference = run_to_stationary(l, opts)?;
        let x = DVector::from_column_slice(reference.0.matrix().as_slice());
        let mut proj = DVector::zeros(x.len());
        for v in &basis {
            proj += v * v.dotc(&x);
        }
        (from_vec(l, proj.as_slice())?, false, Some(reference.1))
    };
    Ok(SteadyStateResult {
        residual: l.residual(&rho),
        rho,
        method: SteadyStateMethod::DenseNullSpace,
        null_dimension: Some(basis.len()),
        unique,
        horizon,
    })
}

fn sparse(l: &Liouvillian, _opts: &SteadyStateOptions) -> Result<SteadyStateResult> {
    let d = l.dim();
    let n = d * d;
    let mut entries: Vec<Triplet<usize, usize, C>> = l
        .triplets()
        .into_iter()
        .filter(|&(r, _, _)| r != 0)
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    for i in 0..d {
        entries.push(Triplet::new(0, i + i * d, C::new(1.0, 0.0)));
    }
    let a = SparseColMat::<usize, C>::try_new_from_triplets(n, n, &entries)
        .map_err(|e| Error::Solver(format!("sparse assembly failed: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::Solver(format!("sparse LU failed: {e:?}")))?;
    let mut rhs = Mat::<C>::zeros(n, 1);
    rhs[(0, 0)] = C::new(1.0, 0.0);
    lu.solve_in_place(rhs.as_mut());
    let x: Vec<C> = (0..n).map(|i| rhs[(i, 0)]).collect();
    if x.iter().any(|z| !z.is_finite()) {
        return Err(Error::Solver("sparse LU produced non-finite values".into()));
    }
    let rho = from_vec(l, &x)?;
    Ok(SteadyStateResult {
        residual: l.residual(&rho),
        rho,
        method: SteadyStateMethod::SparseLu,
        null_dimension: None,
        unique: true,
        horizon: None,
    })
}

fn run_to_stationary(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<(DensityOperator, f64)> {
    let rho0 = initial_state(l, opts)?;
    let eopts = EvolveOptions {
        output_interval: (opts.t_final / 500.0).max(1e-3),
        max_stored_states: 1,
        stationary_tol: Some(0.1 * opts.integration_tol),
        ..Default::default()
    };
    let traj = evolve(l, &rho0, opts.t_final, &eopts)?;
    Ok((traj.final_state, traj.horizon))
}

fn integrate(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<SteadyStateResult> {
    let (rho, horizon) = run_to_stationary(l, opts)?;
    let rho = from_vec(l, rho.matrix().as_slice())?;
    Ok(SteadyStateResult {
        residual: l.residual(&rho),
        rho,
        method: SteadyStateMethod::Integration,
        null_dimension: None,
        unique: true,
        horizon: Some(horizon),
    })
}
