use crate::error::{Error, Result};

/// Product of per-mode Fock spaces `{|0⟩, ..., |d_m - 1⟩}`.
///
/// Flat indices are row-major with mode 0 most significant, so an operator
/// on mode 0 embeds as `op ⊗ I ⊗ ... ⊗ I`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncatedSpace {
    cutoffs: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl TruncatedSpace {
    pub fn new(cutoffs: Vec<usize>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::invalid("truncated space", "at least one mode is required"));
        }
        if let Some(m) = cutoffs.iter().position(|&d| d < 2) {
            return Err(Error::invalid(
                "truncated space",
                format!("mode {m} has cutoff {} (< 2)", cutoffs[m]),
            ));
        }
        let mut strides = vec![1; cutoffs.len()];
        for m in (0..cutoffs.len() - 1).rev() {
            strides[m] = strides[m + 1] * cutoffs[m + 1];
        }
        let dim = strides[0] * cutoffs[0];
        Ok(TruncatedSpace {
            cutoffs,
            strides,
            dim,
        })
    }

    /// Every mode truncated at the same dimension.
    pub fn uniform(n_modes: usize, cutoff: usize) -> Result<Self> {
        Self::new(vec![cutoff; n_modes])
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn n_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }

    pub fn index(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.n_modes() {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes(),
                found: occupations.len(),
            });
        }
        let mut idx = 0;
        for (m, (&n, &d)) in occupations.iter().zip(&self.cutoffs).enumerate() {
            if n >= d {
                return Err(Error::invalid(
                    "occupation",
                    format!("mode {m} holds {n} quanta but is truncated at {d}"),
                ));
            }
            idx += n * self.strides[m];
        }
        Ok(idx)
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        debug_assert!(index < self.dim);
        self.cutoffs
            .iter()
            .zip(&self.strides)
            .map(|(&d, &s)| (index / s) % d)
            .collect()
    }

    /// Occupation of one mode in the basis state with the given flat index.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.cutoffs[mode]
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            Err(Error::invalid(
                "mode index",
                format!("mode {mode} out of range for {} modes", self.n_modes()),
            ))
        } else {
            Ok(())
        }
    }
}

/// Per-mode cutoff `max_excitation + 3`, raised to at least 4 on modes that
/// carry a selective channel.
pub fn default_cutoffs(max_excitation: &[usize], selective: &[bool]) -> Vec<usize> {
    max_excitation
        .iter()
        .enumerate()
        .map(|(m, &n)| {
            let d = n + 3;
            if selective.get(m).copied().unwrap_or(false) {
                d.max(4)
            } else {
                d
            }
        })
        .collect()
}
