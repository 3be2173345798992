//! Coupled-oscillator networks and their normal-mode decomposition.
//!
//! A network of `N` bosonic modes with frequencies `ω_m` and hopping
//! strengths `λ_mn` is described by the single-particle matrix
//!
//! ```text
//! H_mn = ω_m δ_mn + λ_mn (1 - δ_mn)
//! ```
//!
//! Its eigenvectors define the normal modes `A_m = Σ_n C_mn a_n` with an
//! orthogonal `C` whose rows are ordered by descending eigenvalue.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// Natural-basis description of a network of lossy oscillators.
///
/// Frequencies and rates are expressed in units of the reference decay
/// rate, so times come out as `γt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub omega: Vec<f64>,
    /// Symmetric coupling matrix with zero diagonal.
    pub lambda: Vec<Vec<f64>>,
    pub gamma: Vec<f64>,
    pub nbar: Vec<f64>,
}

impl NetworkSpec {
    /// All modes at `omega`, every pair coupled with `lambda`, identical baths.
    pub fn symmetric(n: usize, omega: f64, lambda: f64, gamma: f64, nbar: f64) -> Self {
        let coupling = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { lambda }).collect())
            .collect();
        NetworkSpec {
            omega: vec![omega; n],
            lambda: coupling,
            gamma: vec![gamma; n],
            nbar: vec![nbar; n],
        }
    }

    /// Nearest-neighbour chain with open ends.
    pub fn linear_chain(n: usize, omega: f64, lambda: f64, gamma: f64, nbar: f64) -> Self {
        let coupling = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i.abs_diff(j) == 1 { lambda } else { 0.0 })
                    .collect()
            })
            .collect();
        NetworkSpec {
            omega: vec![omega; n],
            lambda: coupling,
            gamma: vec![gamma; n],
            nbar: vec![nbar; n],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.omega.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_modes();
        if n == 0 {
            return Err(Error::invalid("network", "at least one mode is required"));
        }
        for (name, len) in [
            ("gamma", self.gamma.len()),
            ("nbar", self.nbar.len()),
            ("lambda", self.lambda.len()),
        ] {
            if len != n {
                return Err(Error::invalid(
                    "network",
                    format!("`{name}` has {len} entries for {n} modes"),
                ));
            }
        }
        if let Some(row) = self.lambda.iter().position(|r| r.len() != n) {
            return Err(Error::invalid(
                "network",
                format!("lambda row {row} has {} entries, expected {n}", self.lambda[row].len()),
            ));
        }
        if self.omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("network", "frequencies must be finite"));
        }
        for (name, values) in [("gamma", &self.gamma), ("nbar", &self.nbar)] {
            if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::invalid(
                    "network",
                    format!("`{name}` entries must be finite and non-negative"),
                ));
            }
        }
        for i in 0..n {
            if self.lambda[i][i] != 0.0 {
                return Err(Error::invalid(
                    "network",
                    format!("lambda[{i}][{i}] = {} but the diagonal must be zero", self.lambda[i][i]),
                ));
            }
            for j in 0..i {
                let (a, b) = (self.lambda[i][j], self.lambda[j][i]);
                if !a.is_finite() || !b.is_finite() || (a - b).abs() > SYMMETRY_TOL {
                    return Err(Error::invalid(
                        "network",
                        format!("lambda is not symmetric at ({i}, {j}): {a} vs {b}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Compute the normal modes together with their effective bath parameters.
    pub fn normal_modes(&self) -> Result<NormalModes> {
        let basis = diagonalize(&build_coupling_matrix(self)?)?;
        let (gamma_bar, nbar_bar) = transform_rates(self, &basis)?;
        Ok(NormalModes {
            basis,
            gamma_bar,
            nbar_bar,
        })
    }

    fn is_symmetric_network(&self) -> bool {
        let n = self.n_modes();
        if n < 2 {
            return false;
        }
        let w0 = self.omega[0];
        let l0 = self.lambda[0][1];
        l0 != 0.0
            && self.omega.iter().all(|w| (w - w0).abs() <= SYMMETRY_TOL)
            && (0..n).all(|i| (0..n).all(|j| i == j || (self.lambda[i][j] - l0).abs() <= SYMMETRY_TOL))
    }
}

/// Real orthogonal matrix `C`; row `m` holds the natural-mode amplitudes of
/// normal mode `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTransform(DMatrix<f64>);

impl ModeTransform {
    pub fn new(c: DMatrix<f64>) -> Result<Self> {
        if !c.is_square() {
            return Err(Error::invalid("mode transform", "matrix must be square"));
        }
        let err = orthogonality_error(&c);
        if err > 1e-10 {
            return Err(Error::invalid(
                "mode transform",
                format!("C C^T deviates from identity by {err:.3e}"),
            ));
        }
        Ok(ModeTransform(c))
    }

    pub fn n_modes(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Row `m` as a slice-like vector.
    pub fn row(&self, m: usize) -> Vec<f64> {
        self.0.row(m).iter().copied().collect()
    }

    pub fn orthogonality_error(&self) -> f64 {
        orthogonality_error(&self.0)
    }
}

fn orthogonality_error(c: &DMatrix<f64>) -> f64 {
    let n = c.nrows();
    (c * c.transpose() - DMatrix::<f64>::identity(n, n)).camax()
}

/// Orthogonal transformation plus the normal-mode frequencies `ω̄_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalModeBasis {
    pub transform: ModeTransform,
    pub omega_bar: Vec<f64>,
}

impl NormalModeBasis {
    pub fn n_modes(&self) -> usize {
        self.omega_bar.len()
    }

    /// `C^T diag(ω̄) C`, which should reproduce the coupling matrix.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let c = self.transform.matrix();
        c.transpose() * DMatrix::from_diagonal(&DVector::from_column_slice(&self.omega_bar)) * c
    }
}

/// Normal modes with the decay rates and occupations of their baths.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalModes {
    pub basis: NormalModeBasis,
    pub gamma_bar: Vec<f64>,
    pub nbar_bar: Vec<f64>,
}

pub fn build_coupling_matrix(spec: &NetworkSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let n = spec.n_modes();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            spec.omega[i]
        } else {
            spec.lambda[i][j]
        }
    }))
}

/// Diagonalize a real symmetric coupling matrix.
///
/// Rows of the returned transform are sorted by descending eigenvalue and
/// carry a positive first nonzero component. Degenerate eigenspaces are
/// resolved deterministically: for an all-to-all symmetric matrix the
/// closed-form vectors of [`symmetric_basis`] are used, otherwise the
/// natural unit vectors are projected into the eigenspace and
/// orthonormalized in index order.
pub fn diagonalize(h: &DMatrix<f64>) -> Result<NormalModeBasis> {
    if !h.is_square() || h.nrows() == 0 {
        return Err(Error::invalid("coupling matrix", "must be square and non-empty"));
    }
    let n = h.nrows();
    let asym = (h - h.transpose()).camax();
    if asym > SYMMETRY_TOL || h.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(
            "coupling matrix",
            format!("not symmetric (max asymmetry {asym:.3e})"),
        ));
    }

    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let scale = h.camax().max(1.0);
    let degenerate_tol = 1e-9 * scale;

    let reference = if n >= 2 && is_all_to_all(h) {
        Some(symmetric_basis(n)?)
    } else {
        None
    };

    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut freqs: Vec<f64> = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n
            && (eig.eigenvalues[order[start]] - eig.eigenvalues[order[end]]).abs() <= degenerate_tol
        {
            end += 1;
        }
        let block: Vec<DVector<f64>> = order[start..end]
            .iter()
            .map(|&k| eig.eigenvectors.column(k).into_owned())
            .collect();
        let resolved = if block.len() == 1 {
            block
        } else {
            let candidates: Vec<DVector<f64>> = match &reference {
                Some(t) => (0..n)
                    .map(|m| DVector::from_row_slice(&t.row(m)))
                    .collect(),
                None => (0..n)
                    .map(|k| {
                        let mut e = DVector::zeros(n);
                        e[k] = 1.0;
                        e
                    })
                    .collect(),
            };
            orthonormalize_into_span(&block, &candidates)
        };
        for v in resolved {
            let v = fix_sign(v);
            freqs.push((v.transpose() * h * &v)[(0, 0)]);
            rows.push(v);
        }
        start = end;
    }

    let c = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(NormalModeBasis {
        transform: ModeTransform::new(c)?,
        omega_bar: freqs,
    })
}

/// Closed-form normal modes of the all-to-all symmetric network:
/// `A_1 = N^{-1/2} Σ a_m` and
/// `A_j = (j(j-1))^{-1/2} (Σ_{k<j} a_k - (j-1) a_j)` for `j = 2..N`.
pub fn symmetric_basis(n: usize) -> Result<ModeTransform> {
    if n < 2 {
        return Err(Error::invalid("symmetric basis", format!("need N >= 2, got {n}")));
    }
    let mut c = DMatrix::zeros(n, n);
    let norm = (n as f64).sqrt().recip();
    for k in 0..n {
        c[(0, k)] = norm;
    }
    for j in 2..=n {
        let norm = ((j * (j - 1)) as f64).sqrt().recip();
        for k in 0..j - 1 {
            c[(j - 1, k)] = norm;
        }
        c[(j - 1, j - 1)] = -((j - 1) as f64) * norm;
    }
    ModeTransform::new(c)
}

/// Closed-form normal modes of an open linear chain,
/// `C_nk = sqrt(2/(N+1)) sin(n π k/(N+1))`.
pub fn linear_chain_basis(n: usize) -> Result<ModeTransform> {
    if n < 1 {
        return Err(Error::invalid("chain basis", "need at least one mode"));
    }
    let scale = (2.0 / (n as f64 + 1.0)).sqrt();
    let c = DMatrix::from_fn(n, n, |row, col| {
        let (branch, site) = ((row + 1) as f64, (col + 1) as f64);
        scale * (branch * std::f64::consts::PI * site / (n as f64 + 1.0)).sin()
    });
    ModeTransform::new(c)
}

/// Decay rates and bath occupations seen by each normal mode.
///
/// Without cross-decay terms, a nondegenerate network inherits
/// `γ̄_m = Σ_n C_mn² γ_n` and the rate-weighted occupation, which reduces to
/// `γ̄_m = γ`, `n̄̄_m = n̄` for identical baths. The degenerate all-to-all
/// network with identical baths decays only through its bright mode:
/// `γ̄ = Nγ` on the nondegenerate mode and zero on the degenerate ones.
pub fn transform_rates(spec: &NetworkSpec, basis: &NormalModeBasis) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    let n = spec.n_modes();
    if basis.n_modes() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: basis.n_modes(),
        });
    }
    if n == 1 {
        return Ok((spec.gamma.clone(), spec.nbar.clone()));
    }

    let scale = basis.omega_bar.iter().fold(1.0f64, |m, w| m.max(w.abs()));
    let tol = 1e-9 * scale;
    let degenerate = (0..n).any(|i| {
        (0..n).any(|j| i != j && (basis.omega_bar[i] - basis.omega_bar[j]).abs() <= tol)
    });

    let uniform = |v: &[f64]| v.iter().all(|x| (x - v[0]).abs() <= SYMMETRY_TOL);
    let identical_baths = uniform(&spec.gamma) && uniform(&spec.nbar);

    if degenerate {
        if !identical_baths {
            return Err(Error::Unsupported(
                "degenerate normal modes with non-identical baths".into(),
            ));
        }
        if !spec.is_symmetric_network() {
            return Err(Error::Unsupported(
                "degenerate normal modes outside the all-to-all symmetric network".into(),
            ));
        }
        // The bright mode is the only one whose frequency is unique.
        let bright = (0..n)
            .find(|&i| {
                (0..n).all(|j| i == j || (basis.omega_bar[i] - basis.omega_bar[j]).abs() > tol)
            })
            .ok_or_else(|| Error::Unsupported("fully degenerate spectrum".into()))?;
        let mut gamma_bar = vec![0.0; n];
        gamma_bar[bright] = n as f64 * spec.gamma[0];
        return Ok((gamma_bar, vec![spec.nbar[0]; n]));
    }

    let c = basis.transform.matrix();
    let mut gamma_bar = Vec::with_capacity(n);
    let mut nbar_bar = Vec::with_capacity(n);
    for m in 0..n {
        let g: f64 = (0..n).map(|k| c[(m, k)].powi(2) * spec.gamma[k]).sum();
        let gn: f64 = (0..n)
            .map(|k| c[(m, k)].powi(2) * spec.gamma[k] * spec.nbar[k])
            .sum();
        let nb = if identical_baths {
            spec.nbar[0]
        } else if g > 0.0 {
            gn / g
        } else {
            0.0
        };
        gamma_bar.push(if identical_baths { spec.gamma[0] } else { g });
        nbar_bar.push(nb);
    }
    Ok((gamma_bar, nbar_bar))
}

fn is_all_to_all(h: &DMatrix<f64>) -> bool {
    let n = h.nrows();
    let d = h[(0, 0)];
    let off = h[(0, 1)];
    (0..n).all(|i| {
        (0..n).all(|j| {
            let target = if i == j { d } else { off };
            (h[(i, j)] - target).abs() <= SYMMETRY_TOL
        })
    })
}

/// Gram-Schmidt the projections of `candidates` onto `span(block)` until the
/// span is exhausted.
fn orthonormalize_into_span(block: &[DVector<f64>], candidates: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(block.len());
    for cand in candidates {
        if out.len() == block.len() {
            break;
        }
        let mut v: DVector<f64> = block.iter().map(|b| b * b.dot(cand)).sum();
        for u in &out {
            v -= u * u.dot(&v);
        }
        let norm = v.norm();
        if norm > 1e-8 {
            // second pass for numerical orthogonality
            let mut v = v / norm;
            for u in &out {
                v -= u * u.dot(&v);
            }
            out.push(v.normalize());
        }
    }
    debug_assert_eq!(out.len(), block.len());
    out
}

fn fix_sign(v: DVector<f64>) -> DVector<f64> {
    match v.iter().find(|x| x.abs() > 1e-12) {
        Some(x) if *x < 0.0 => -v,
        _ => v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn coupling_matrix_two_cavities() {
        let spec = NetworkSpec::symmetric(2, 1.0, 0.1, 1.0, 0.05);
        let h = build_coupling_matrix(&spec).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.1, 1.0]));
    }

    #[test]
    fn coupling_matrix_uncoupled_and_symmetric() {
        let h = build_coupling_matrix(&NetworkSpec::symmetric(3, 1.0, 0.0, 1.0, 0.0)).unwrap();
        assert_eq!(h, DMatrix::identity(3, 3));
        let h = build_coupling_matrix(&NetworkSpec::symmetric(3, 1.0, 0.2, 1.0, 0.0)).unwrap();
        assert_eq!(
            h,
            DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.2, 0.2, 1.0, 0.2, 0.2, 0.2, 1.0])
        );
    }

    #[test]
    fn asymmetric_lambda_is_rejected() {
        let mut spec = NetworkSpec::symmetric(2, 1.0, 0.1, 1.0, 0.0);
        spec.lambda[0][1] = 0.2;
        assert!(matches!(build_coupling_matrix(&spec), Err(Error::Invalid { .. })));
        let mut spec = NetworkSpec::symmetric(2, 1.0, 0.1, 1.0, 0.0);
        spec.lambda[1][1] = 0.3;
        assert!(spec.validate().is_err());
        let mut spec = NetworkSpec::symmetric(2, 1.0, 0.1, 1.0, 0.0);
        spec.gamma[0] = -1.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn two_cavity_normal_modes() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.1, 1.0]);
        let basis = diagonalize(&h).unwrap();
        assert_close(basis.omega_bar[0], 1.1, 1e-12);
        assert_close(basis.omega_bar[1], 0.9, 1e-12);
        let s = 0.5f64.sqrt();
        let c = basis.transform.matrix();
        assert_close(c[(0, 0)], s, 1e-12);
        assert_close(c[(0, 1)], s, 1e-12);
        assert_close(c[(1, 0)], s, 1e-12);
        assert_close(c[(1, 1)], -s, 1e-12);
    }

    #[test]
    fn diagonal_input_is_identity() {
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let basis = diagonalize(&h).unwrap();
        assert_eq!(basis.omega_bar, vec![2.0, 1.0]);
        assert_eq!(basis.transform.matrix(), &DMatrix::identity(2, 2));
    }

    #[test]
    fn four_mode_symmetric_spectrum() {
        let h = build_coupling_matrix(&NetworkSpec::symmetric(4, 1.0, 0.1, 1.0, 0.0)).unwrap();
        let basis = diagonalize(&h).unwrap();
        assert_close(basis.omega_bar[0], 1.3, 1e-12);
        for w in &basis.omega_bar[1..] {
            assert_close(*w, 0.9, 1e-12);
        }
        // the degenerate block is resolved onto the closed-form vectors
        let closed = symmetric_basis(4).unwrap();
        assert!((basis.transform.matrix() - closed.matrix()).camax() < 1e-12);
    }

    #[test]
    fn non_symmetric_input_is_rejected() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.2, 1.0]);
        assert!(diagonalize(&h).is_err());
    }

    #[test]
    fn symmetric_basis_rows() {
        let s = 0.5f64.sqrt();
        let c2 = symmetric_basis(2).unwrap();
        assert_eq!(c2.row(0).len(), 2);
        assert_close(c2.row(0)[0], s, 1e-15);
        assert_close(c2.row(1)[1], -s, 1e-15);

        let c3 = symmetric_basis(3).unwrap();
        for x in c3.row(0) {
            assert_close(x, 1.0 / 3f64.sqrt(), 1e-15);
        }
        let r = c3.row(2);
        let k = 1.0 / 6f64.sqrt();
        assert_close(r[0], k, 1e-15);
        assert_close(r[1], k, 1e-15);
        assert_close(r[2], -2.0 * k, 1e-15);
        assert!(symmetric_basis(1).is_err());
    }

    #[test]
    fn symmetric_basis_orthonormal_small_n() {
        for n in 2..=8 {
            assert!(symmetric_basis(n).unwrap().orthogonality_error() < 1e-12, "N = {n}");
        }
    }

    #[test]
    fn degenerate_non_symmetric_tie_break_uses_unit_vectors() {
        // two uncoupled identical modes plus a detuned one
        let h = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let basis = diagonalize(&h).unwrap();
        assert_eq!(basis.omega_bar, vec![2.0, 1.0, 1.0]);
        let c = basis.transform.matrix();
        assert_close(c[(0, 2)], 1.0, 1e-12);
        assert_close(c[(1, 0)], 1.0, 1e-12);
        assert_close(c[(2, 1)], 1.0, 1e-12);
    }

    #[test]
    fn rates_identical_baths() {
        let spec = NetworkSpec::symmetric(2, 1.0, 0.1, 1.0, 0.05);
        let modes = spec.normal_modes().unwrap();
        assert_eq!(modes.gamma_bar, vec![1.0, 1.0]);
        assert_eq!(modes.nbar_bar, vec![0.05, 0.05]);
    }

    #[test]
    fn rates_degenerate_symmetric_network() {
        let spec = NetworkSpec::symmetric(3, 1.0, 0.1, 1.0, 0.05);
        let modes = spec.normal_modes().unwrap();
        assert_eq!(modes.gamma_bar, vec![3.0, 0.0, 0.0]);
        assert_eq!(modes.nbar_bar, vec![0.05; 3]);
    }

    #[test]
    fn rates_single_mode() {
        let spec = NetworkSpec {
            omega: vec![1.0],
            lambda: vec![vec![0.0]],
            gamma: vec![0.7],
            nbar: vec![0.1],
        };
        let modes = spec.normal_modes().unwrap();
        assert_eq!(modes.gamma_bar, vec![0.7]);
        assert_eq!(modes.nbar_bar, vec![0.1]);
    }

    #[test]
    fn rates_heterogeneous_degenerate_is_unsupported() {
        let mut spec = NetworkSpec::symmetric(3, 1.0, 0.1, 1.0, 0.05);
        spec.gamma[2] = 2.0;
        assert!(matches!(spec.normal_modes(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rates_heterogeneous_nondegenerate_weighted() {
        let mut spec = NetworkSpec::symmetric(2, 1.0, 0.1, 1.0, 0.0);
        spec.gamma = vec![1.0, 3.0];
        let modes = spec.normal_modes().unwrap();
        assert_close(modes.gamma_bar[0], 2.0, 1e-12);
        assert_close(modes.gamma_bar[1], 2.0, 1e-12);
    }

    #[test]
    fn chain_basis_matches_diagonalization() {
        let spec = NetworkSpec::linear_chain(4, 1.0, 0.2, 1.0, 0.0);
        let basis = diagonalize(&build_coupling_matrix(&spec).unwrap()).unwrap();
        let closed = linear_chain_basis(4).unwrap();
        assert!((basis.transform.matrix() - closed.matrix()).camax() < 1e-12);
    }
}
