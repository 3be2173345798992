use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Basis, DensityOperator, StateVector, TruncatedSpace};
use crate::error::{Error, Result};
use crate::network::{linear_chain_basis, symmetric_basis, ModeTransform};

/// Largest total excitation [`to_natural_basis`] expands by default.
pub const DEFAULT_EXCITATION_LIMIT: usize = 4;

/// Product of truncated geometric distributions `p_n ∝ (n̄/(1+n̄))^n`,
/// renormalized on the truncated space.
///
/// Identical occupations make the product invariant under any orthogonal
/// mode transformation, so a normal-basis thermal state is only built for
/// uniform `n̄`.
pub fn thermal_state(space: &TruncatedSpace, nbar: &[f64], basis: Basis) -> Result<DensityOperator> {
    if nbar.len() != space.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: space.n_modes(),
            found: nbar.len(),
        });
    }
    if nbar.iter().any(|n| !n.is_finite() || *n < 0.0) {
        return Err(Error::invalid("thermal occupation", "must be finite and non-negative"));
    }
    if basis == Basis::Normal && nbar.iter().any(|n| (n - nbar[0]).abs() > 1e-12) {
        return Err(Error::Unsupported(
            "normal-basis thermal state for non-identical occupations".into(),
        ));
    }
    let per_mode: Vec<Vec<f64>> = space
        .cutoffs()
        .iter()
        .zip(nbar)
        .map(|(&d, &n)| {
            let ratio = n / (1.0 + n);
            let w: Vec<f64> = (0..d).map(|k| ratio.powi(k as i32)).collect();
            let z: f64 = w.iter().sum();
            w.into_iter().map(|x| x / z).collect()
        })
        .collect();
    let d = space.dim();
    let mut diag = DVector::zeros(d);
    for i in 0..d {
        let p: f64 = (0..space.n_modes())
            .map(|m| per_mode[m][space.occupation(i, m)])
            .product();
        diag[i] = Complex64::new(p, 0.0);
    }
    // exact unit trace after rounding
    let tr: f64 = diag.iter().map(|z| z.re).sum();
    diag /= Complex64::new(tr, 0.0);
    DensityOperator::new(space.clone(), DMatrix::from_diagonal(&diag), basis)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TargetKind {
    /// `|1,0⟩_M = (|1,0⟩ + |0,1⟩)/√2`.
    BellPlus,
    /// `|0,1⟩_M = (|1,0⟩ - |0,1⟩)/√2`.
    BellMinus,
    /// `|1,1⟩_M = (|2,0⟩ - |0,2⟩)/√2`.
    Noon,
    /// `|1,0,...,0⟩_M`, the N-mode W state.
    W { n_modes: usize },
    /// Single excitation in chain branch `n`:
    /// `|Ψ_n⟩ = sqrt(2/(N+1)) Σ_k sin(nπk/(N+1)) a_k† |0⟩`.
    LinearChain { n_modes: usize, branch: usize },
}

impl TargetKind {
    pub fn n_modes(&self) -> usize {
        match *self {
            TargetKind::BellPlus | TargetKind::BellMinus | TargetKind::Noon => 2,
            TargetKind::W { n_modes } | TargetKind::LinearChain { n_modes, .. } => n_modes,
        }
    }

    /// Normal-mode Fock occupations of the target.
    pub fn normal_occupations(&self) -> Result<Vec<usize>> {
        let n = self.n_modes();
        let mut occ = vec![0; n];
        match *self {
            TargetKind::BellPlus => occ[0] = 1,
            TargetKind::BellMinus => occ[1] = 1,
            TargetKind::Noon => occ = vec![1, 1],
            TargetKind::W { n_modes } => {
                if n_modes < 2 {
                    return Err(Error::invalid("target", "W state needs N >= 2"));
                }
                occ[0] = 1;
            }
            TargetKind::LinearChain { n_modes, branch } => {
                if branch < 1 || branch > n_modes {
                    return Err(Error::invalid(
                        "target",
                        format!("chain branch {branch} outside 1..={n_modes}"),
                    ));
                }
                occ[branch - 1] = 1;
            }
        }
        Ok(occ)
    }

    /// The mode transform under which the normal-basis form maps to the
    /// natural-basis target.
    pub fn transform(&self) -> Result<ModeTransform> {
        match *self {
            TargetKind::BellPlus | TargetKind::BellMinus | TargetKind::Noon => symmetric_basis(2),
            TargetKind::W { n_modes } => symmetric_basis(n_modes),
            TargetKind::LinearChain { n_modes, .. } => linear_chain_basis(n_modes),
        }
    }
}

/// A target expressed in both bases.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub kind: TargetKind,
    pub normal: StateVector,
    pub natural: StateVector,
}

/// Build a target state on the given normal-mode space and map it to the
/// natural oscillators.
pub fn target_state(kind: TargetKind, space: &TruncatedSpace) -> Result<TargetState> {
    if space.n_modes() != kind.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: kind.n_modes(),
            found: space.n_modes(),
        });
    }
    let occ = kind.normal_occupations()?;
    let normal = StateVector::fock(space, &occ, Basis::Normal)?;
    let natural = to_natural_basis(&kind.transform()?, &normal, DEFAULT_EXCITATION_LIMIT)?;
    Ok(TargetState {
        kind,
        normal,
        natural,
    })
}

/// Expand a normal-basis Fock superposition in the natural oscillators via
/// `A_m† = Σ_n C_mn a_n†`.
///
/// The output lives on a uniform space truncated at the largest total
/// excitation plus one, so no amplitude is lost.
pub fn to_natural_basis(transform: &ModeTransform, psi: &StateVector, limit: usize) -> Result<StateVector> {
    if psi.basis() != Basis::Normal {
        return Err(Error::BasisMismatch {
            expected: Basis::Normal,
            found: psi.basis(),
        });
    }
    let n = transform.n_modes();
    let space = psi.space();
    if space.n_modes() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: space.n_modes(),
        });
    }

    let components: Vec<(Vec<usize>, Complex64)> = psi
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(i, a)| (space.occupations(i), *a))
        .collect();
    let max_exc = components
        .iter()
        .map(|(occ, _)| occ.iter().sum::<usize>())
        .max()
        .unwrap_or(0);
    if max_exc > limit {
        return Err(Error::Unsupported(format!(
            "total excitation {max_exc} exceeds the expansion limit {limit}"
        )));
    }

    let out_space = TruncatedSpace::uniform(n, (max_exc + 1).max(2))?;
    let c = transform.matrix();
    let mut amps: DVector<Complex64> = DVector::zeros(out_space.dim());
    for (occ, weight) in components {
        // polynomial in the natural creation operators: exponent vector -> coefficient
        let mut poly: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        poly.insert(vec![0; n], 1.0);
        let mut norm = 1.0;
        for (m, &count) in occ.iter().enumerate() {
            for _ in 0..count {
                let mut next: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
                for (exps, coeff) in &poly {
                    for k in 0..n {
                        let cmk = c[(m, k)];
                        if cmk == 0.0 {
                            continue;
                        }
                        let mut e = exps.clone();
                        e[k] += 1;
                        *next.entry(e).or_insert(0.0) += coeff * cmk;
                    }
                }
                poly = next;
            }
            norm *= factorial(count);
        }
        let norm = norm.sqrt().recip();
        for (exps, coeff) in poly {
            let fock_norm: f64 = exps.iter().map(|&e| factorial(e)).product::<f64>().sqrt();
            let idx = out_space.index(&exps)?;
            amps[idx] += weight * Complex64::new(coeff * norm * fock_norm, 0.0);
        }
    }
    // exact cancellations leave rounding residue
    for a in amps.iter_mut() {
        if a.norm() < 1e-15 {
            *a = Complex64::new(0.0, 0.0);
        }
    }
    StateVector::new(out_space, amps, Basis::Natural)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: Complex64, b: f64) -> bool {
        (a - Complex64::new(b, 0.0)).norm() < 1e-12
    }

    #[test]
    fn vacuum_thermal_state() {
        let s = TruncatedSpace::new(vec![3, 3]).unwrap();
        let rho = thermal_state(&s, &[0.0, 0.0], Basis::Normal).unwrap();
        assert_eq!(rho.population(&[0, 0]).unwrap(), 1.0);
        assert_eq!(rho.trace(), 1.0);
    }

    #[test]
    fn thermal_ground_population() {
        // brute-force normalization of geometric weights on d = 4
        let nbar: f64 = 0.05;
        let q = nbar / (1.0 + nbar);
        let z: f64 = (0..4).map(|k| q.powi(k)).sum();
        let p0_truncated = 1.0 / z;
        assert!((1.0 / (1.0 + nbar) - 0.952_380_952).abs() < 1e-9);

        let s = TruncatedSpace::new(vec![4]).unwrap();
        let rho = thermal_state(&s, &[nbar], Basis::Normal).unwrap();
        assert!((rho.population(&[0]).unwrap() - p0_truncated).abs() < 1e-15);
        assert!((p0_truncated - 0.952_380_952).abs() < 1.2e-4);

        let s2 = TruncatedSpace::new(vec![4, 4]).unwrap();
        let rho2 = thermal_state(&s2, &[nbar, nbar], Basis::Normal).unwrap();
        assert!((rho2.population(&[0, 0]).unwrap() - p0_truncated.powi(2)).abs() < 1e-15);
        let off: f64 = (0..16)
            .flat_map(|i| (0..16).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| rho2.matrix()[(i, j)].norm())
            .sum();
        assert_eq!(off, 0.0);
    }

    #[test]
    fn normal_thermal_state_needs_uniform_occupation() {
        let s = TruncatedSpace::new(vec![3, 3]).unwrap();
        assert!(matches!(
            thermal_state(&s, &[0.1, 0.2], Basis::Normal),
            Err(Error::Unsupported(_))
        ));
        assert!(thermal_state(&s, &[0.1, 0.2], Basis::Natural).is_ok());
    }

    #[test]
    fn w_state_three_modes() {
        let s = TruncatedSpace::new(vec![4, 3, 3]).unwrap();
        let t = target_state(TargetKind::W { n_modes: 3 }, &s).unwrap();
        let k = 1.0 / 3f64.sqrt();
        assert!(close(t.natural.amplitude(&[1, 0, 0]).unwrap(), k));
        assert!(close(t.natural.amplitude(&[0, 1, 0]).unwrap(), k));
        assert!(close(t.natural.amplitude(&[0, 0, 1]).unwrap(), k));
        assert!(t.natural.is_normalized());
    }

    #[test]
    fn noon_state() {
        let s = TruncatedSpace::new(vec![4, 4]).unwrap();
        let t = target_state(TargetKind::Noon, &s).unwrap();
        assert_eq!(t.normal.amplitude(&[1, 1]).unwrap(), Complex64::new(1.0, 0.0));
        assert!(close(t.natural.amplitude(&[2, 0]).unwrap(), S));
        assert!(close(t.natural.amplitude(&[0, 2]).unwrap(), -S));
        assert!(close(t.natural.amplitude(&[1, 1]).unwrap(), 0.0));
    }

    #[test]
    fn bell_states() {
        let s = TruncatedSpace::new(vec![4, 4]).unwrap();
        let plus = target_state(TargetKind::BellPlus, &s).unwrap();
        assert!(close(plus.natural.amplitude(&[1, 0]).unwrap(), S));
        assert!(close(plus.natural.amplitude(&[0, 1]).unwrap(), S));
        let minus = target_state(TargetKind::BellMinus, &s).unwrap();
        assert!(close(minus.natural.amplitude(&[1, 0]).unwrap(), S));
        assert!(close(minus.natural.amplitude(&[0, 1]).unwrap(), -S));
    }

    #[test]
    fn linear_chain_branch_two() {
        // sin(2πk/4) for k = 1, 2, 3 is (1, 0, -1); normalized gives 1/√2
        let s = TruncatedSpace::new(vec![3, 3, 3]).unwrap();
        let t = target_state(TargetKind::LinearChain { n_modes: 3, branch: 2 }, &s).unwrap();
        assert!(close(t.natural.amplitude(&[1, 0, 0]).unwrap(), S));
        assert!(close(t.natural.amplitude(&[0, 1, 0]).unwrap(), 0.0));
        assert!(close(t.natural.amplitude(&[0, 0, 1]).unwrap(), -S));
        assert!(target_state(TargetKind::LinearChain { n_modes: 3, branch: 4 }, &s).is_err());
        assert!(target_state(TargetKind::LinearChain { n_modes: 3, branch: 0 }, &s).is_err());
    }

    #[test]
    fn vacuum_maps_to_vacuum() {
        let s = TruncatedSpace::new(vec![3, 3]).unwrap();
        let vac = StateVector::fock(&s, &[0, 0], Basis::Normal).unwrap();
        let out = to_natural_basis(&symmetric_basis(2).unwrap(), &vac, 4).unwrap();
        assert!(close(out.amplitude(&[0, 0]).unwrap(), 1.0));
        assert!((out.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn excitation_limit_guard() {
        let s = TruncatedSpace::new(vec![4, 4]).unwrap();
        let psi = StateVector::fock(&s, &[3, 2], Basis::Normal).unwrap();
        assert!(matches!(
            to_natural_basis(&symmetric_basis(2).unwrap(), &psi, 4),
            Err(Error::Unsupported(_))
        ));
        let natural = StateVector::fock(&s, &[1, 0], Basis::Natural).unwrap();
        assert!(to_natural_basis(&symmetric_basis(2).unwrap(), &natural, 4).is_err());
    }
}
