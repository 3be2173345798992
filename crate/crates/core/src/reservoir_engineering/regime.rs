use std::fmt;

use serde::{Deserialize, Serialize};

use super::couplings::{effective_couplings, engineered_rate, selectivity_tuning, DriveParams};
use crate::error::Result;

/// Ratio that counts as "much greater than".
pub const DEFAULT_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckClass {
    /// Only one normal mode sees the atom.
    ModeSeparation,
    /// Adiabatic elimination of the intermediate level.
    Dispersive,
    /// Off-resonant suppression of the unwanted Fock transitions.
    Selectivity,
    /// Validity of the per-atom perturbative rate.
    CoarseGraining,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotEvaluated,
}

/// One inequality `lhs ≫ rhs`, with `ratio = lhs / rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub name: String,
    pub class: CheckClass,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub threshold: f64,
    pub n_max: usize,
    pub checks: Vec<RegimeCheck>,
}

impl RegimeReport {
    pub fn all_pass(&self, class: CheckClass) -> bool {
        self.checks
            .iter()
            .filter(|c| c.class == class)
            .all(|c| c.status == CheckStatus::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RegimeCheck> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&RegimeCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(name: &str, class: CheckClass, lhs: f64, rhs: f64, threshold: f64) -> RegimeCheck {
    let ratio = if rhs == 0.0 {
        if lhs > 0.0 {
            f64::INFINITY
        } else {
            f64::NAN
        }
    } else {
        lhs / rhs
    };
    // exact threshold ratios count as satisfied despite rounding
    let status = if ratio.is_nan() {
        CheckStatus::NotEvaluated
    } else if ratio >= threshold * (1.0 - 1e-12) {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    RegimeCheck {
        name: name.to_string(),
        class,
        lhs,
        rhs,
        ratio,
        status,
    }
}

/// [`validate_regime_with`] at the default threshold of 10.
pub fn validate_regime(p: &DriveParams, n_max: usize) -> Result<RegimeReport> {
    validate_regime_with(p, n_max, DEFAULT_THRESHOLD)
}

/// Evaluate every inequality behind the effective selective interaction
/// for field states up to `n_max`. Failures are reported, never raised.
pub fn validate_regime_with(p: &DriveParams, n_max: usize, threshold: f64) -> Result<RegimeReport> {
    let c = effective_couplings(p)?;
    let w0 = p.omega0.norm();
    let w1 = p.omega1.norm();
    let w2 = p.omega2.norm();
    let mode_separation = match p.lambda {
        Some(lambda) => check("lambda >> |Omega0|", CheckClass::ModeSeparation, lambda.abs(), w0, threshold),
        None => RegimeCheck {
            name: "lambda >> |Omega0|".into(),
            class: CheckClass::ModeSeparation,
            lhs: f64::NAN,
            rhs: w0,
            ratio: f64::NAN,
            status: CheckStatus::NotEvaluated,
        },
    };
    let mut checks = vec![mode_separation];
    checks.push(check(
        "|Delta| >> |Omega0| sqrt(n_max+1)",
        CheckClass::Dispersive,
        p.detuning.abs(),
        w0 * ((n_max + 1) as f64).sqrt(),
        threshold,
    ));
    checks.push(check("|Delta1| >> |Omega1|", CheckClass::Dispersive, p.detuning_1.abs(), w1, threshold));
    checks.push(check("|Delta2| >> |Omega2|", CheckClass::Dispersive, p.detuning_2.abs(), w2, threshold));
    checks.push(check(
        "xi >> sqrt(n_max+2) |zeta|",
        CheckClass::Selectivity,
        c.xi.abs(),
        ((n_max + 2) as f64).sqrt() * c.zeta.norm(),
        threshold,
    ));
    checks.push(check(
        "varpi_g >> |delta|",
        CheckClass::Selectivity,
        c.varpi_g.abs(),
        p.delta.abs(),
        threshold,
    ));
    checks.push(check(
        "|Omega1| >> sqrt(Delta1/Delta2) |Omega2|",
        CheckClass::Selectivity,
        w1,
        (p.detuning_1 / p.detuning_2).abs().sqrt() * w2,
        threshold,
    ));
    checks.push(check(
        "1 >> |zeta_ell| tau",
        CheckClass::CoarseGraining,
        1.0,
        c.zeta_n(p.ell_target).norm() * p.tau,
        threshold,
    ));
    Ok(RegimeReport {
        threshold,
        n_max,
        checks,
    })
}

/// One row of the achievable-rate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub ell: usize,
    pub omega1_abs: f64,
    pub delta: f64,
    pub zeta_ell: f64,
    pub rate: f64,
    /// `Γ / γ` when a natural loss rate is given.
    pub rate_over_gamma: Option<f64>,
}

/// Everything needed to judge a drive configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub params: DriveParams,
    pub xi: f64,
    pub zeta_abs: f64,
    pub varpi_g: f64,
    pub varpi_e: f64,
    /// `φ_n` for `n = 0..=n_max`.
    pub phi: Vec<f64>,
    pub rates: Vec<RateRow>,
    pub regime: RegimeReport,
}

/// Couplings, tuning and rate for each `ℓ ≤ n_max`, and the regime checks.
pub fn design_report(p: &DriveParams, n_max: usize, gamma: Option<f64>) -> Result<DesignReport> {
    let c = effective_couplings(p)?;
    let mut rates = Vec::with_capacity(n_max + 1);
    for ell in 0..=n_max {
        let t = selectivity_tuning(p, ell)?;
        let rate = engineered_rate(&t.apply(p), ell)?;
        rates.push(RateRow {
            ell,
            omega1_abs: t.omega1_abs,
            delta: t.delta,
            zeta_ell: c.zeta_n(ell).norm(),
            rate,
            rate_over_gamma: gamma.filter(|g| *g > 0.0).map(|g| rate / g),
        });
    }
    Ok(DesignReport {
        params: *p,
        xi: c.xi,
        zeta_abs: c.zeta.norm(),
        varpi_g: c.varpi_g,
        varpi_e: c.varpi_e,
        phi: (0..=n_max).map(|n| c.phi_n(n)).collect(),
        rates,
        regime: validate_regime(p, n_max)?,
    })
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "FAIL",
            CheckStatus::NotEvaluated => "n/a",
        })
    }
}

impl fmt::Display for RegimeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "regime checks (threshold {}, n_max {})", self.threshold, self.n_max)?;
        for c in &self.checks {
            writeln!(
                f,
                "  {:<5} {:<16} {:<42} lhs {:>11.4e}  rhs {:>11.4e}  ratio {:>9.3}",
                c.status.to_string(),
                format!("{:?}", c.class),
                c.name,
                c.lhs,
                c.rhs,
                c.ratio
            )?;
        }
        Ok(())
    }
}

impl fmt::Display for DesignReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w0 = self.params.omega0.norm();
        writeln!(f, "effective couplings")?;
        writeln!(f, "  xi      = {:.6e}  ({:.6e} |Omega0|)", self.xi, self.xi / w0)?;
        writeln!(f, "  |zeta|  = {:.6e}  ({:.6e} |Omega0|)", self.zeta_abs, self.zeta_abs / w0)?;
        writeln!(f, "  varpi_g = {:.6e}", self.varpi_g)?;
        writeln!(f, "  varpi_e = {:.6e}", self.varpi_e)?;
        for (n, phi) in self.phi.iter().enumerate() {
            writeln!(f, "  phi_{n}   = {phi:.6e}")?;
        }
        writeln!(f, "achievable rates (r = {:.4e}, tau = {:.4e})", self.params.r, self.params.tau)?;
        writeln!(f, "  ell  |Omega1|      delta        |zeta_ell|   Gamma        Gamma/gamma")?;
        for row in &self.rates {
            let ratio = row
                .rate_over_gamma
                .map(|x| format!("{x:.4e}"))
                .unwrap_or_else(|| "-".into());
            writeln!(
                f,
                "  {:<4} {:.4e}  {:.4e}  {:.4e}  {:.4e}  {}",
                row.ell, row.omega1_abs, row.delta, row.zeta_ell, row.rate, ratio
            )?;
        }
        write!(f, "{}", self.regime)
    }
}
