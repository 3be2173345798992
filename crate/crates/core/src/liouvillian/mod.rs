//! Lindblad generators in the normal-mode basis.
//!
//! A generator is the sum of an optional coherent part `-i[H̄, ρ]` and
//! dissipators
//!
//! ```text
//! D[J]ρ = (Γ/2)(2 J ρ J† - ρ J†J - J†J ρ)
//! ```
//!
//! Density matrices are vectorized by stacking columns, so element
//! `ρ[(i, j)]` sits at index `i + j·D` and `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
//! This matches nalgebra's column-major storage.

mod presets;

pub use presets::{
    bell_full_generator, bell_generator, linear_chain_generator, noon_generator,
    symmetric_network_rates, thermal_channels, w_generator, Bath,
};

use faer::sparse::{SparseRowMat, Triplet};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{ladder_ops, selective_ops, Basis, DensityOperator, TruncatedSpace};

type C = Complex64;

/// Kind of dissipative channel acting on one normal mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelKind {
    /// Jump operator `A`; the bath's emission term, rate `γ(1+n̄)`.
    ThermalEmission,
    /// Jump operator `A†`; the bath's absorption term, rate `γn̄`.
    ThermalAbsorption,
    /// Jump operator `|ℓ⟩⟨ℓ+1|`.
    SelectiveEmission { ell: usize },
    /// Jump operator `|ℓ+1⟩⟨ℓ|`.
    SelectiveAbsorption { ell: usize },
    /// Engineered cooling, jump operator `A`.
    Cooling,
}

impl ChannelKind {
    pub fn jump_operator(&self, space: &TruncatedSpace, mode: usize) -> Result<DMatrix<C>> {
        Ok(match *self {
            ChannelKind::ThermalEmission | ChannelKind::Cooling => ladder_ops(space, mode)?.0,
            ChannelKind::ThermalAbsorption => ladder_ops(space, mode)?.1,
            ChannelKind::SelectiveEmission { ell } => selective_ops(space, mode, ell)?.0,
            ChannelKind::SelectiveAbsorption { ell } => selective_ops(space, mode, ell)?.1,
        })
    }

    pub fn is_selective(&self) -> bool {
        matches!(
            self,
            ChannelKind::SelectiveEmission { .. } | ChannelKind::SelectiveAbsorption { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub mode: usize,
    #[serde(flatten)]
    pub kind: ChannelKind,
    pub rate: f64,
}

impl ChannelSpec {
    pub fn new(mode: usize, kind: ChannelKind, rate: f64) -> Self {
        ChannelSpec { mode, kind, rate }
    }
}

/// Everything needed to assemble a generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub space: TruncatedSpace,
    pub hamiltonian: Option<DMatrix<C>>,
    pub channels: Vec<ChannelSpec>,
}

impl GeneratorSpec {
    pub fn new(space: TruncatedSpace, channels: Vec<ChannelSpec>) -> Self {
        GeneratorSpec {
            space,
            hamiltonian: None,
            channels,
        }
    }

    /// Switch on the coherent term `H̄ = Σ ω̄_m A_m† A_m`.
    pub fn with_normal_mode_hamiltonian(mut self, omega_bar: &[f64]) -> Result<Self> {
        self.hamiltonian = Some(normal_mode_hamiltonian(&self.space, omega_bar)?);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.space.n_modes();
        for (k, ch) in self.channels.iter().enumerate() {
            if ch.mode >= n {
                return Err(Error::invalid(
                    "channel",
                    format!("channel {k} acts on mode {} but the space has {n} modes", ch.mode),
                ));
            }
            if !ch.rate.is_finite() || ch.rate < 0.0 {
                return Err(Error::invalid(
                    "channel",
                    format!("channel {k} has rate {}", ch.rate),
                ));
            }
            if let ChannelKind::SelectiveEmission { ell } | ChannelKind::SelectiveAbsorption { ell } =
                ch.kind
            {
                let d = self.space.cutoffs()[ch.mode];
                if ell + 1 >= d {
                    return Err(Error::invalid(
                        "channel",
                        format!("channel {k}: ell = {ell} does not fit cutoff {d}"),
                    ));
                }
            }
        }
        if let Some(h) = &self.hamiltonian {
            let d = self.space.dim();
            if h.nrows() != d || h.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: h.nrows(),
                });
            }
            if (h - h.adjoint()).camax() > 1e-12 {
                return Err(Error::invalid("hamiltonian", "not Hermitian"));
            }
        }
        Ok(())
    }
}

pub fn normal_mode_hamiltonian(space: &TruncatedSpace, omega_bar: &[f64]) -> Result<DMatrix<C>> {
    if omega_bar.len() != space.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: space.n_modes(),
            found: omega_bar.len(),
        });
    }
    let d = space.dim();
    Ok(DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let e: f64 = (0..space.n_modes())
                .map(|m| omega_bar[m] * space.occupation(i, m) as f64)
                .sum();
            C::new(e, 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    }))
}

#[derive(Debug, Clone)]
struct Jump {
    op: DMatrix<C>,
    op_dag: DMatrix<C>,
    op_dag_op: DMatrix<C>,
    rate: f64,
}

/// Assembled generator, available both as a sparse `D² × D²` matrix and as
/// a matrix-free action on `D × D` density matrices.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    space: TruncatedSpace,
    hamiltonian: Option<DMatrix<C>>,
    jumps: Vec<Jump>,
    matrix: SparseRowMat<usize, C>,
}

/// The single-channel generator `ρ ↦ (Γ/2)(2JρJ† - ρJ†J - J†Jρ)`.
pub fn dissipator(space: &TruncatedSpace, jump: &DMatrix<C>, rate: f64) -> Result<Liouvillian> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::invalid("dissipator", format!("rate {rate} must be non-negative")));
    }
    Liouvillian::from_parts(space.clone(), None, vec![(jump.clone(), rate)])
}

/// Assemble `-i[H̄, ·] + Σ_channels D[J_k]`.
pub fn assemble(gen: &GeneratorSpec) -> Result<Liouvillian> {
    gen.validate()?;
    let jumps = gen
        .channels
        .iter()
        .map(|ch| Ok((ch.kind.jump_operator(&gen.space, ch.mode)?, ch.rate)))
        .collect::<Result<Vec<_>>>()?;
    Liouvillian::from_parts(gen.space.clone(), gen.hamiltonian.clone(), jumps)
}

impl Liouvillian {
    pub fn from_parts(
        space: TruncatedSpace,
        hamiltonian: Option<DMatrix<C>>,
        jumps: Vec<(DMatrix<C>, f64)>,
    ) -> Result<Self> {
        let d = space.dim();
        for (op, _) in &jumps {
            if op.nrows() != d || op.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: op.nrows(),
                });
            }
        }
        let jumps: Vec<Jump> = jumps
            .into_iter()
            .map(|(op, rate)| {
                let op_dag = op.adjoint();
                let op_dag_op = &op_dag * &op;
                Jump {
                    op,
                    op_dag,
                    op_dag_op,
                    rate,
                }
            })
            .collect();
        let matrix = build_matrix(d, hamiltonian.as_ref(), &jumps)?;
        Ok(Liouvillian {
            space,
            hamiltonian,
            jumps,
            matrix,
        })
    }

    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    /// Hilbert-space dimension `D`.
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn n_channels(&self) -> usize {
        self.jumps.len()
    }

    pub fn has_hamiltonian(&self) -> bool {
        self.hamiltonian.is_some()
    }

    pub fn matrix(&self) -> &SparseRowMat<usize, C> {
        &self.matrix
    }

    pub fn nnz(&self) -> usize {
        self.matrix.val().len()
    }

    /// Matrix-free action on a `D × D` matrix.
    pub fn apply(&self, rho: &DMatrix<C>) -> DMatrix<C> {
        let mut out = match &self.hamiltonian {
            Some(h) => (h * rho - rho * h) * C::new(0.0, -1.0),
            None => DMatrix::zeros(rho.nrows(), rho.ncols()),
        };
        for j in &self.jumps {
            if j.rate == 0.0 {
                continue;
            }
            let sandwich = &j.op * rho * &j.op_dag;
            let anti = &j.op_dag_op * rho + rho * &j.op_dag_op;
            out += (sandwich * C::new(2.0, 0.0) - anti) * C::new(0.5 * j.rate, 0.0);
        }
        out
    }

    /// `y = L x` on column-stacked vectors, using the sparse matrix.
    pub fn apply_vec(&self, x: &[C], y: &mut [C]) {
        let sym = self.matrix.symbolic();
        let row_ptr = sym.row_ptr();
        let col_idx = sym.col_idx();
        let val = self.matrix.val();
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C::new(0.0, 0.0);
            for k in row_ptr[r]..row_ptr[r + 1] {
                acc += val[k] * x[col_idx[k]];
            }
            *out = acc;
        }
    }

    /// Maximum absolute column sum of the sparse matrix. Bounds the
    /// spectral radius and serves as the generator's total rate scale.
    pub fn one_norm(&self) -> f64 {
        let n = self.dim() * self.dim();
        let mut cols = vec![0.0; n];
        let sym = self.matrix.symbolic();
        for (&c, v) in sym.col_idx().iter().zip(self.matrix.val()) {
            cols[c] += v.norm();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C> {
        let n = self.dim() * self.dim();
        let mut m = DMatrix::zeros(n, n);
        let sym = self.matrix.symbolic();
        let (row_ptr, col_idx, val) = (sym.row_ptr(), sym.col_idx(), self.matrix.val());
        for r in 0..n {
            for k in row_ptr[r]..row_ptr[r + 1] {
                m[(r, col_idx[k])] = val[k];
            }
        }
        m
    }

    pub(crate) fn triplets(&self) -> Vec<(usize, usize, C)> {
        let n = self.dim() * self.dim();
        let sym = self.matrix.symbolic();
        let (row_ptr, col_idx, val) = (sym.row_ptr(), sym.col_idx(), self.matrix.val());
        let mut out = Vec::with_capacity(val.len());
        for r in 0..n {
            for k in row_ptr[r]..row_ptr[r + 1] {
                out.push((r, col_idx[k], val[k]));
            }
        }
        out
    }

    /// Entrywise max norm of `L[ρ]`, computed matrix-free.
    pub fn residual(&self, rho: &DensityOperator) -> f64 {
        self.apply(rho.matrix()).camax()
    }

    pub(crate) fn check_state(&self, rho: &DensityOperator) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        if rho.basis() != Basis::Normal {
            return Err(Error::BasisMismatch {
                expected: Basis::Normal,
                found: rho.basis(),
            });
        }
        Ok(())
    }
}

fn nonzeros(m: &DMatrix<C>) -> Vec<(usize, usize, C)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != C::new(0.0, 0.0) {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Push the entries of `s · (Bᵀ ⊗ A)` for the map `X ↦ s·A X B`.
/// `None` stands for the identity.
fn push_sandwich(
    d: usize,
    s: C,
    a: Option<&[(usize, usize, C)]>,
    b: Option<&[(usize, usize, C)]>,
    out: &mut Vec<(usize, usize, C)>,
) {
    match (a, b) {
        (Some(a), Some(b)) => {
            for &(l, j, bv) in b {
                for &(i, k, av) in a {
                    out.push((i + j * d, k + l * d, s * av * bv));
                }
            }
        }
        (Some(a), None) => {
            for l in 0..d {
                for &(i, k, av) in a {
                    out.push((i + l * d, k + l * d, s * av));
                }
            }
        }
        (None, Some(b)) => {
            for &(l, j, bv) in b {
                for i in 0..d {
                    out.push((i + j * d, i + l * d, s * bv));
                }
            }
        }
        (None, None) => {
            for i in 0..d * d {
                out.push((i, i, s));
            }
        }
    }
}

fn build_matrix(d: usize, hamiltonian: Option<&DMatrix<C>>, jumps: &[Jump]) -> Result<SparseRowMat<usize, C>> {
    let mut entries: Vec<(usize, usize, C)> = Vec::new();
    if let Some(h) = hamiltonian {
        let hz = nonzeros(h);
        push_sandwich(d, C::new(0.0, -1.0), Some(&hz), None, &mut entries);
        push_sandwich(d, C::new(0.0, 1.0), None, Some(&hz), &mut entries);
    }
    for j in jumps {
        if j.rate == 0.0 {
            continue;
        }
        let jz = nonzeros(&j.op);
        let jdz = nonzeros(&j.op_dag);
        let nz = nonzeros(&j.op_dag_op);
        push_sandwich(d, C::new(j.rate, 0.0), Some(&jz), Some(&jdz), &mut entries);
        push_sandwich(d, C::new(-0.5 * j.rate, 0.0), Some(&nz), None, &mut entries);
        push_sandwich(d, C::new(-0.5 * j.rate, 0.0), None, Some(&nz), &mut entries);
    }
    // stable sort: duplicates are summed in generation order, so the
    // assembled matrix is bit-reproducible
    entries.sort_by_key(|&(r, c, _)| (r, c));
    let mut merged: Vec<Triplet<usize, usize, C>> = Vec::with_capacity(entries.len());
    for (r, c, v) in entries {
        match merged.last_mut() {
            Some(last) if last.row == r && last.col == c => last.val += v,
            _ => merged.push(Triplet::new(r, c, v)),
        }
    }
    merged.retain(|t| t.val != C::new(0.0, 0.0));
    SparseRowMat::try_new_from_triplets(d * d, d * d, &merged)
        .map_err(|e| Error::Solver(format!("sparse assembly failed: {e:?}")))
}
