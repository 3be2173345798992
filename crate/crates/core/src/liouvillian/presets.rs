//! Generators for the standard preparation schemes.
//!
//! Mode 0 is always the highest normal-mode frequency, e.g. `ω̄₊ = ω + λ`
//! for two coupled cavities or the bright mode `ω + (N-1)λ` of an
//! all-to-all network with `λ > 0`.

use serde::{Deserialize, Serialize};

use super::{ChannelKind, ChannelSpec, GeneratorSpec};
use crate::error::{Error, Result};
use crate::network::NetworkSpec;
use crate::states::TruncatedSpace;

/// Natural bath of every cavity: decay rate and thermal occupation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bath {
    pub gamma: f64,
    pub nbar: f64,
}

impl Default for Bath {
    fn default() -> Self {
        Bath {
            gamma: 1.0,
            nbar: 0.05,
        }
    }
}

/// Emission at `γ(1+n̄)` and absorption at `γn̄` on one mode.
pub fn thermal_channels(mode: usize, gamma: f64, nbar: f64) -> [ChannelSpec; 2] {
    [
        ChannelSpec::new(mode, ChannelKind::ThermalEmission, gamma * (1.0 + nbar)),
        ChannelSpec::new(mode, ChannelKind::ThermalAbsorption, gamma * nbar),
    ]
}

fn check_space(space: &TruncatedSpace, n: usize) -> Result<()> {
    if space.n_modes() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: space.n_modes(),
        });
    }
    Ok(())
}

fn check_rates(rates: &[(&str, f64)]) -> Result<()> {
    for (name, r) in rates {
        if !r.is_finite() || *r < 0.0 {
            return Err(Error::invalid("rate", format!("`{name}` = {r} must be non-negative")));
        }
    }
    Ok(())
}

fn two_cavity_thermal(bath: Bath) -> Vec<ChannelSpec> {
    // both normal modes of two identical cavities inherit (γ, n̄)
    (0..2)
        .flat_map(|m| thermal_channels(m, bath.gamma, bath.nbar))
        .collect()
}

/// Selective absorption `ℓ′ = 0` on the `+` mode plus the natural baths.
pub fn bell_generator(space: &TruncatedSpace, gamma0: f64, bath: Bath) -> Result<GeneratorSpec> {
    check_space(space, 2)?;
    check_rates(&[("gamma0", gamma0)])?;
    let mut channels = vec![ChannelSpec::new(0, ChannelKind::SelectiveAbsorption { ell: 0 }, gamma0)];
    channels.extend(two_cavity_thermal(bath));
    Ok(GeneratorSpec::new(space.clone(), channels))
}

/// Bell scheme with all three engineered terms: selective emission `ℓ = 1`
/// and absorption `ℓ′ = 0` on the `+` mode, cooling on the `-` mode.
pub fn bell_full_generator(
    space: &TruncatedSpace,
    gamma_plus_1: f64,
    gamma_plus_0: f64,
    gamma_minus: f64,
    bath: Bath,
) -> Result<GeneratorSpec> {
    check_space(space, 2)?;
    check_rates(&[
        ("gamma_plus_1", gamma_plus_1),
        ("gamma_plus_0", gamma_plus_0),
        ("gamma_minus", gamma_minus),
    ])?;
    let mut channels = vec![
        ChannelSpec::new(0, ChannelKind::SelectiveAbsorption { ell: 0 }, gamma_plus_0),
        ChannelSpec::new(0, ChannelKind::SelectiveEmission { ell: 1 }, gamma_plus_1),
        ChannelSpec::new(1, ChannelKind::Cooling, gamma_minus),
    ];
    channels.extend(two_cavity_thermal(bath));
    Ok(GeneratorSpec::new(space.clone(), channels))
}

/// Selective absorption `ℓ′ = 0` on both normal modes, optionally with
/// selective emission `ℓ = 1` at `(Γ₊₁, Γ₋₁)`.
pub fn noon_generator(
    space: &TruncatedSpace,
    gamma_plus_0: f64,
    gamma_minus_0: f64,
    emission: Option<(f64, f64)>,
    bath: Bath,
) -> Result<GeneratorSpec> {
    check_space(space, 2)?;
    check_rates(&[("gamma_plus_0", gamma_plus_0), ("gamma_minus_0", gamma_minus_0)])?;
    let mut channels = vec![
        ChannelSpec::new(0, ChannelKind::SelectiveAbsorption { ell: 0 }, gamma_plus_0),
        ChannelSpec::new(1, ChannelKind::SelectiveAbsorption { ell: 0 }, gamma_minus_0),
    ];
    if let Some((gp1, gm1)) = emission {
        check_rates(&[("gamma_plus_1", gp1), ("gamma_minus_1", gm1)])?;
        channels.push(ChannelSpec::new(0, ChannelKind::SelectiveEmission { ell: 1 }, gp1));
        channels.push(ChannelSpec::new(1, ChannelKind::SelectiveEmission { ell: 1 }, gm1));
    }
    channels.extend(two_cavity_thermal(bath));
    Ok(GeneratorSpec::new(space.clone(), channels))
}

/// Normal-mode bath parameters of the all-to-all network of `n` identical
/// cavities. They do not depend on `ω` or on the (positive) coupling.
pub fn symmetric_network_rates(n: usize, bath: Bath) -> Result<(Vec<f64>, Vec<f64>)> {
    let modes = NetworkSpec::symmetric(n, 1.0, 0.1, bath.gamma, bath.nbar).normal_modes()?;
    Ok((modes.gamma_bar, modes.nbar_bar))
}

/// W-state scheme: selective absorption on the bright mode, cooling on the
/// `N - 1` degenerate modes, natural loss only where `γ̄ > 0`.
pub fn w_generator(
    space: &TruncatedSpace,
    n: usize,
    gamma_10: f64,
    gamma_j: f64,
    bath: Bath,
) -> Result<GeneratorSpec> {
    if n < 2 {
        return Err(Error::invalid("w generator", format!("need N >= 2, got {n}")));
    }
    check_space(space, n)?;
    check_rates(&[("gamma_10", gamma_10), ("gamma_j", gamma_j)])?;
    let (gamma_bar, nbar_bar) = symmetric_network_rates(n, bath)?;
    let mut channels = vec![ChannelSpec::new(0, ChannelKind::SelectiveAbsorption { ell: 0 }, gamma_10)];
    for m in 0..n {
        if gamma_bar[m] > 0.0 {
            channels.extend(thermal_channels(m, gamma_bar[m], nbar_bar[m]));
        }
    }
    for m in 1..n {
        channels.push(ChannelSpec::new(m, ChannelKind::Cooling, gamma_j));
    }
    Ok(GeneratorSpec::new(space.clone(), channels))
}

/// Single excitation in branch `n` (1-based) of an open chain: selective
/// absorption on that normal mode, cooling on the others, and natural loss
/// `(γ, n̄)` on every mode.
pub fn linear_chain_generator(
    space: &TruncatedSpace,
    n_modes: usize,
    branch: usize,
    gamma_sel: f64,
    gamma_cool: f64,
    bath: Bath,
) -> Result<GeneratorSpec> {
    check_space(space, n_modes)?;
    if branch < 1 || branch > n_modes {
        return Err(Error::invalid(
            "chain generator",
            format!("branch {branch} outside 1..={n_modes}"),
        ));
    }
    check_rates(&[("gamma_sel", gamma_sel), ("gamma_cool", gamma_cool)])?;
    let target = branch - 1;
    let mut channels = vec![ChannelSpec::new(
        target,
        ChannelKind::SelectiveAbsorption { ell: 0 },
        gamma_sel,
    )];
    for m in (0..n_modes).filter(|&m| m != target) {
        channels.push(ChannelSpec::new(m, ChannelKind::Cooling, gamma_cool));
    }
    for m in 0..n_modes {
        channels.extend(thermal_channels(m, bath.gamma, bath.nbar));
    }
    Ok(GeneratorSpec::new(space.clone(), channels))
}
