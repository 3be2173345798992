use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Drive amplitudes and detunings of a three-level atom crossing the cavity,
/// in angular-frequency units, plus the beam parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Atom-field coupling to the selected normal mode.
    pub omega0: Complex64,
    /// Laser on the `g ↔ i` leg.
    pub omega1: Complex64,
    /// Laser on the `e ↔ i` leg.
    pub omega2: Complex64,
    /// Mode detuning `Δ = ω̄ - ω_ig`.
    pub detuning: f64,
    /// `Δ₁ = ω_ig - ω₁`.
    pub detuning_1: f64,
    /// `Δ₂ = ω₂ - ω_ie`.
    pub detuning_2: f64,
    /// Selectivity detuning `δ`.
    pub delta: f64,
    pub ell_target: usize,
    /// Atomic arrival rate.
    pub r: f64,
    /// Transit time of one atom.
    pub tau: f64,
    /// Intercavity coupling, if known.
    #[serde(default)]
    pub lambda: Option<f64>,
}

impl DriveParams {
    /// Strongly dispersive working point built from `|Ω₀|`:
    /// `Δ = Δ₁ = 1.01 Δ₂ = 10|Ω₀|`, `|Ω₂| = |Ω₀|/10`, `r⁻¹ = τ = 100/|Ω₀|`,
    /// tuned to `ℓ = 0`.
    pub fn dispersive_regime(omega0: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::invalid("drive", "|Omega0| must be positive"));
        }
        let p = DriveParams {
            omega0: Complex64::new(omega0, 0.0),
            omega1: Complex64::new(0.0, 0.0),
            omega2: Complex64::new(omega0 / 10.0, 0.0),
            detuning: 10.0 * omega0,
            detuning_1: 10.0 * omega0,
            detuning_2: 10.0 * omega0 / 1.01,
            delta: 0.0,
            ell_target: 0,
            r: omega0 / 100.0,
            tau: 100.0 / omega0,
            lambda: None,
        };
        let t = selectivity_tuning(&p, 0)?;
        Ok(t.apply(&p))
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega0, self.omega1, self.omega2].iter().all(|z| z.is_finite())
            && [self.detuning, self.detuning_1, self.detuning_2, self.delta]
                .iter()
                .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("drive", "non-finite amplitude or detuning"));
        }
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(Error::invalid("drive", format!("arrival rate r = {} must be >= 0", self.r)));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::invalid("drive", format!("transit time tau = {} must be >= 0", self.tau)));
        }
        if let Some(l) = self.lambda {
            if !l.is_finite() {
                return Err(Error::invalid("drive", "lambda must be finite"));
            }
        }
        Ok(())
    }
}

/// Couplings of the effective dispersive Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCouplings {
    /// Dispersive shift per photon.
    pub xi: f64,
    /// Raman coupling.
    pub zeta: Complex64,
    pub varpi_g: f64,
    pub varpi_e: f64,
    /// Selectivity detuning carried over from the drive.
    pub delta: f64,
}

impl EffectiveCouplings {
    /// `ζ_n = √(n+1) ζ`.
    pub fn zeta_n(&self, n: usize) -> Complex64 {
        self.zeta * ((n + 1) as f64).sqrt()
    }

    /// `φ_n = (n+1)ξ + δ - ϖ_g - ϖ_e`.
    pub fn phi_n(&self, n: usize) -> f64 {
        (n + 1) as f64 * self.xi + self.delta - self.varpi_g - self.varpi_e
    }
}

/// `ξ = |Ω₀|²/(√2 Δ)`, `ζ = √2 Ω₀* Ω₂ (Δ⁻¹ + Δ₂⁻¹)/4`,
/// `ϖ_g = |Ω₁|²/Δ₁`, `ϖ_e = |Ω₂|²/Δ₂`.
pub fn effective_couplings(p: &DriveParams) -> Result<EffectiveCouplings> {
    p.validate()?;
    if p.detuning == 0.0 {
        return Err(Error::ZeroParameter("detuning"));
    }
    if p.detuning_1 == 0.0 {
        return Err(Error::ZeroParameter("detuning_1"));
    }
    if p.detuning_2 == 0.0 {
        return Err(Error::ZeroParameter("detuning_2"));
    }
    let xi = p.omega0.norm_sqr() / (p.detuning * std::f64::consts::SQRT_2);
    let zeta = p.omega0.conj() * p.omega2 * (std::f64::consts::SQRT_2 / 4.0)
        * (1.0 / p.detuning + 1.0 / p.detuning_2);
    Ok(EffectiveCouplings {
        xi,
        zeta,
        varpi_g: p.omega1.norm_sqr() / p.detuning_1,
        varpi_e: p.omega2.norm_sqr() / p.detuning_2,
        delta: p.delta,
    })
}

/// Laser settings that make `φ_ℓ` vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tuning {
    pub ell: usize,
    /// Required `|Ω₁|`, from `ϖ_g = (ℓ+1)ξ`.
    pub omega1_abs: f64,
    /// `δ = ϖ_e`.
    pub delta: f64,
}

impl Tuning {
    /// Copy of `p` with `|Ω₁|` and `δ` set; the phase of `Ω₁` is kept.
    pub fn apply(&self, p: &DriveParams) -> DriveParams {
        let phase = if p.omega1.norm() > 0.0 {
            p.omega1 / p.omega1.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        DriveParams {
            omega1: phase * self.omega1_abs,
            delta: self.delta,
            ell_target: self.ell,
            ..*p
        }
    }
}

/// Solve `ϖ_g = (ℓ+1)ξ` and `δ = ϖ_e`, i.e. `|Ω₁| = √((ℓ+1) ξ Δ₁)`.
pub fn selectivity_tuning(p: &DriveParams, ell: usize) -> Result<Tuning> {
    let c = effective_couplings(p)?;
    let sq = (ell + 1) as f64 * c.xi * p.detuning_1;
    if sq < 0.0 {
        return Err(Error::invalid(
            "tuning",
            "detuning_1 and detuning have opposite signs; no real |Omega1| exists",
        ));
    }
    Ok(Tuning {
        ell,
        omega1_abs: sq.sqrt(),
        delta: c.varpi_e,
    })
}

/// Coarse-grained rate `Γ = r (|ζ_ℓ| τ)²`.
pub fn engineered_rate(p: &DriveParams, ell: usize) -> Result<f64> {
    let c = effective_couplings(p)?;
    let x = c.zeta_n(ell).norm() * p.tau;
    Ok(p.r * x * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regime() -> DriveParams {
        DriveParams::dispersive_regime(1.0).unwrap()
    }

    #[test]
    fn xi_at_ten_omega0() {
        let c = effective_couplings(&regime()).unwrap();
        assert!((c.xi - 1.0 / (10.0 * 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn zeta_in_dispersive_regime() {
        let c = effective_couplings(&regime()).unwrap();
        // √2 · 0.1 · (0.1 + 0.101) / 4
        let expected = 2f64.sqrt() * 0.1 * (0.1 + 0.101) / 4.0;
        assert!((c.zeta.norm() - expected).abs() < 1e-15);
        assert!((c.zeta.norm() - 7.106e-3).abs() < 1e-6);
    }

    #[test]
    fn zero_detuning_is_named() {
        let mut p = regime();
        p.detuning_2 = 0.0;
        assert!(matches!(effective_couplings(&p), Err(Error::ZeroParameter("detuning_2"))));
        p.detuning_2 = 1.0;
        p.detuning = 0.0;
        assert!(matches!(effective_couplings(&p), Err(Error::ZeroParameter("detuning"))));
    }

    #[test]
    fn no_raman_leg_no_rate() {
        let mut p = regime();
        p.omega2 = Complex64::new(0.0, 0.0);
        assert_eq!(effective_couplings(&p).unwrap().zeta.norm(), 0.0);
        assert_eq!(engineered_rate(&p, 0).unwrap(), 0.0);
    }

    #[test]
    fn tuning_zeroes_selected_phase() {
        let p = regime();
        for ell in 0..4 {
            let tuned = selectivity_tuning(&p, ell).unwrap().apply(&p);
            let c = effective_couplings(&tuned).unwrap();
            assert!(c.phi_n(ell).abs() < 1e-15, "ell = {ell}");
            if ell > 0 {
                assert!((c.phi_n(ell - 1).abs() - c.xi).abs() < 1e-15);
            }
            assert!((c.phi_n(ell + 1).abs() - c.xi).abs() < 1e-15);
        }
    }

    #[test]
    fn omega1_scales_with_sqrt_ell_plus_one() {
        let p = regime();
        let t0 = selectivity_tuning(&p, 0).unwrap();
        let t1 = selectivity_tuning(&p, 1).unwrap();
        assert!((t1.omega1_abs / t0.omega1_abs - 2f64.sqrt()).abs() < 1e-14);
        // Δ₁ = Δ: |Ω₁|² = ξΔ = |Ω₀|²/√2
        assert!((t0.omega1_abs - 2f64.powf(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn rate_is_quadratic_in_tau() {
        let mut p = regime();
        let g = engineered_rate(&p, 0).unwrap();
        p.tau *= 0.5;
        assert!((engineered_rate(&p, 0).unwrap() - g / 4.0).abs() < 1e-15);
    }

    #[test]
    fn rate_ignores_global_phases() {
        let p = regime();
        let g = engineered_rate(&p, 0).unwrap();
        let mut q = p;
        q.omega0 *= Complex64::from_polar(1.0, 0.7);
        q.omega2 *= Complex64::from_polar(1.0, -2.1);
        assert!((engineered_rate(&q, 0).unwrap() - g).abs() < 1e-15 * g.max(1.0));
    }

    #[test]
    fn sign_conflict_is_rejected() {
        let mut p = regime();
        p.detuning_1 = -p.detuning_1;
        assert!(selectivity_tuning(&p, 0).is_err());
    }
}
