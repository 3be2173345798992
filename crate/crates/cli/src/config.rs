use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bosonet::liouvillian::{
    bell_full_generator, bell_generator, linear_chain_generator, noon_generator, w_generator, Bath,
    ChannelSpec, GeneratorSpec,
};
use bosonet::reservoir_engineering::DriveParams;
use bosonet::states::{default_cutoffs, target_state, TargetKind, TruncatedSpace};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Bell,
    BellFull,
    Noon,
    NoonFull,
    W,
    LinearChain,
    Custom,
}

impl Scenario {
    /// Rate keys the scenario reads from `rates`.
    pub fn rate_keys(self) -> &'static [&'static str] {
        match self {
            Scenario::Bell => &["gamma0"],
            Scenario::BellFull => &["gamma_plus_1", "gamma_plus_0", "gamma_minus"],
            Scenario::Noon => &["gamma_plus_0", "gamma_minus_0"],
            Scenario::NoonFull => &["gamma_plus_0", "gamma_minus_0", "gamma_plus_1", "gamma_minus_1"],
            Scenario::W => &["gamma_10", "gamma_j"],
            Scenario::LinearChain => &["gamma_sel", "gamma_cool"],
            Scenario::Custom => &[],
        }
    }
}

fn default_gamma() -> f64 {
    1.0
}

fn default_nbar() -> f64 {
    0.05
}

fn default_t_final() -> f64 {
    50.0
}

fn default_interval() -> f64 {
    0.05
}

fn default_true() -> bool {
    true
}

/// One simulation run. Rates are in units of `gamma`, times in `γt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Number of modes for `w` and `linear_chain`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_modes: Option<usize>,
    /// 1-based chain branch for `linear_chain`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<usize>,
    #[serde(default)]
    pub rates: BTreeMap<String, f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_nbar")]
    pub nbar: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Vec<usize>>,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_interval")]
    pub output_interval: f64,
    /// Also solve for the stationary state.
    #[serde(default = "default_true")]
    pub steady_state: bool,
    /// Channels of a `custom` run, rates in units of `gamma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<Vec<ChannelSpec>>,
    /// Target of a `custom` run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ScenarioConfig {
    /// Preset with the given engineered rates and every other field at its
    /// default.
    pub fn preset(scenario: Scenario, rates: &[(&str, f64)]) -> Self {
        ScenarioConfig {
            scenario,
            n_modes: None,
            branch: None,
            rates: rates.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            gamma: default_gamma(),
            nbar: default_nbar(),
            cutoffs: None,
            t_final: default_t_final(),
            dt: None,
            output_interval: default_interval(),
            steady_state: true,
            channels: None,
            target: None,
            output: None,
        }
    }

    pub fn with_modes(mut self, n: usize) -> Self {
        self.n_modes = Some(n);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| {
            CliError::config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(CliError::config(format!("{name}: must be positive, got {x}")))
            }
        };
        positive("gamma", self.gamma)?;
        positive("t_final", self.t_final)?;
        positive("output_interval", self.output_interval)?;
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        if !(self.nbar.is_finite() && self.nbar >= 0.0) {
            return Err(CliError::config(format!("nbar: must be >= 0, got {}", self.nbar)));
        }

        let keys = self.scenario.rate_keys();
        for (k, v) in &self.rates {
            if self.scenario != Scenario::Custom && !keys.contains(&k.as_str()) {
                return Err(CliError::config(format!(
                    "rates.{k}: not used by scenario {:?} (expected {})",
                    self.scenario,
                    keys.join(", ")
                )));
            }
            if !(v.is_finite() && *v >= 0.0) {
                return Err(CliError::config(format!("rates.{k}: must be >= 0, got {v}")));
            }
        }
        for k in keys {
            if !self.rates.contains_key(*k) {
                return Err(CliError::config(format!("rates.{k}: required by scenario {:?}", self.scenario)));
            }
        }

        let needs_n = matches!(self.scenario, Scenario::W | Scenario::LinearChain);
        match (needs_n, self.n_modes) {
            (true, None) => return Err(CliError::config("n_modes: required for this scenario")),
            (true, Some(n)) if n < 2 => {
                return Err(CliError::config(format!("n_modes: must be >= 2, got {n}")))
            }
            (false, Some(_)) if self.scenario != Scenario::Custom => {
                return Err(CliError::config("n_modes: only used by w and linear_chain"))
            }
            _ => {}
        }
        if self.scenario == Scenario::LinearChain {
            let n = self.n_modes.unwrap_or(0);
            match self.branch {
                Some(b) if (1..=n).contains(&b) => {}
                Some(b) => return Err(CliError::config(format!("branch: {b} outside 1..={n}"))),
                None => return Err(CliError::config("branch: required for linear_chain")),
            }
        } else if self.branch.is_some() {
            return Err(CliError::config("branch: only used by linear_chain"));
        }

        if self.scenario == Scenario::Custom {
            let channels = self
                .channels
                .as_ref()
                .ok_or_else(|| CliError::config("channels: required for custom"))?;
            if channels.is_empty() {
                return Err(CliError::config("channels: at least one channel required"));
            }
            if self.target.is_none() {
                return Err(CliError::config("target: required for custom"));
            }
            if self.cutoffs.is_none() {
                return Err(CliError::config("cutoffs: required for custom"));
            }
        } else if self.channels.is_some() || self.target.is_some() {
            return Err(CliError::config("channels/target: only used by custom"));
        }

        let n = self.n_modes();
        if let Some(c) = &self.cutoffs {
            if c.len() != n {
                return Err(CliError::config(format!(
                    "cutoffs: expected {n} entries, got {}",
                    c.len()
                )));
            }
            if let Some(bad) = c.iter().find(|&&d| d < 2) {
                return Err(CliError::config(format!("cutoffs: each cutoff must be >= 2, got {bad}")));
            }
        }
        // catch channel/mode/target errors here rather than mid-run
        self.generator()
            .map_err(|e| CliError::config(format!("scenario: {e}")))?;
        let kind = self.target_kind().ok_or_else(|| CliError::config("target: missing"))?;
        target_state(kind, &self.space()?).map_err(|e| CliError::config(format!("target: {e}")))?;
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        match self.scenario {
            Scenario::W | Scenario::LinearChain => self.n_modes.unwrap_or(0),
            Scenario::Custom => match self.target {
                Some(t) => t.n_modes(),
                None => self.cutoffs.as_ref().map_or(0, Vec::len),
            },
            _ => 2,
        }
    }

    fn rate(&self, key: &str) -> f64 {
        self.rates.get(key).copied().unwrap_or(0.0) * self.gamma
    }

    /// Cutoffs from the config, or the scenario default: 4 on two-mode
    /// schemes; 4 on the pumped mode and 3 elsewhere for the W scheme; the
    /// generic rule for chains.
    pub fn resolved_cutoffs(&self) -> Vec<usize> {
        if let Some(c) = &self.cutoffs {
            return c.clone();
        }
        let n = self.n_modes();
        match self.scenario {
            Scenario::W => {
                let mut c = vec![3; n];
                c[0] = 4;
                c
            }
            Scenario::LinearChain => {
                let target = self.branch.unwrap_or(1) - 1;
                let occ: Vec<usize> = (0..n).map(|m| usize::from(m == target)).collect();
                let sel: Vec<bool> = (0..n).map(|m| m == target).collect();
                default_cutoffs(&occ, &sel)
            }
            _ => vec![4; n],
        }
    }

    pub fn space(&self) -> bosonet::Result<TruncatedSpace> {
        TruncatedSpace::new(self.resolved_cutoffs())
    }

    pub fn target_kind(&self) -> Option<TargetKind> {
        match self.scenario {
            Scenario::Bell | Scenario::BellFull => Some(TargetKind::BellPlus),
            Scenario::Noon | Scenario::NoonFull => Some(TargetKind::Noon),
            Scenario::W => self.n_modes.map(|n_modes| TargetKind::W { n_modes }),
            Scenario::LinearChain => match (self.n_modes, self.branch) {
                (Some(n_modes), Some(branch)) => Some(TargetKind::LinearChain { n_modes, branch }),
                _ => None,
            },
            Scenario::Custom => self.target,
        }
    }

    /// Generator in physical units: engineered rates are `rate × gamma`.
    pub fn generator(&self) -> bosonet::Result<GeneratorSpec> {
        let space = self.space()?;
        let bath = Bath {
            gamma: self.gamma,
            nbar: self.nbar,
        };
        let r = |k| self.rate(k);
        match self.scenario {
            Scenario::Bell => bell_generator(&space, r("gamma0"), bath),
            Scenario::BellFull => {
                bell_full_generator(&space, r("gamma_plus_1"), r("gamma_plus_0"), r("gamma_minus"), bath)
            }
            Scenario::Noon => noon_generator(&space, r("gamma_plus_0"), r("gamma_minus_0"), None, bath),
            Scenario::NoonFull => noon_generator(
                &space,
                r("gamma_plus_0"),
                r("gamma_minus_0"),
                Some((r("gamma_plus_1"), r("gamma_minus_1"))),
                bath,
            ),
            Scenario::W => w_generator(&space, self.n_modes(), r("gamma_10"), r("gamma_j"), bath),
            Scenario::LinearChain => linear_chain_generator(
                &space,
                self.n_modes(),
                self.branch.unwrap_or(0),
                r("gamma_sel"),
                r("gamma_cool"),
                bath,
            ),
            Scenario::Custom => {
                let channels = self
                    .channels
                    .iter()
                    .flatten()
                    .map(|c| ChannelSpec::new(c.mode, c.kind, c.rate * self.gamma))
                    .collect();
                let gen = GeneratorSpec::new(space, channels);
                gen.validate()?;
                Ok(gen)
            }
        }
    }

    /// Set a named parameter; rate keys may be given bare or as `rates.<key>`.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        let key = name.strip_prefix("rates.").unwrap_or(name);
        match name {
            "gamma" => self.gamma = value,
            "nbar" => self.nbar = value,
            "t_final" => self.t_final = value,
            "dt" => self.dt = Some(value),
            "output_interval" => self.output_interval = value,
            _ if self.scenario.rate_keys().contains(&key) || self.rates.contains_key(key) => {
                self.rates.insert(key.to_string(), value);
            }
            _ => {
                return Err(CliError::config(format!(
                    "param: `{name}` is not a parameter of scenario {:?}",
                    self.scenario
                )))
            }
        }
        Ok(())
    }
}

/// Drive description for `design`: either explicit parameters or the
/// standard dispersive working point built from `|Ω₀|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveParams>,
    /// `|Ω₀|` of the dispersive working point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    /// Overrides the intercavity coupling of either form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Natural loss rate, for `Γ/γ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Largest Fock level in the rate table and regime checks.
    #[serde(default)]
    pub n_max: usize,
}

impl DesignConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: DesignConfig = serde_json::from_str(text).map_err(|e| {
            CliError::config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.drive_params()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn drive_params(&self) -> Result<DriveParams> {
        let mut p = match (&self.drive, self.omega0) {
            (Some(p), None) => *p,
            (None, Some(w)) => DriveParams::dispersive_regime(w)
                .map_err(|e| CliError::config(format!("omega0: {e}")))?,
            (Some(_), Some(_)) => return Err(CliError::config("give either drive or omega0, not both")),
            (None, None) => return Err(CliError::config("one of drive or omega0 is required")),
        };
        if self.lambda.is_some() {
            p.lambda = self.lambda;
        }
        p.validate().map_err(|e| CliError::config(format!("drive: {e}")))?;
        if let Some(g) = self.gamma {
            if !(g.is_finite() && g > 0.0) {
                return Err(CliError::config(format!("gamma: must be positive, got {g}")));
            }
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_bell_config() {
        let cfg = ScenarioConfig::from_json(r#"{"scenario": "bell", "rates": {"gamma0": 50}}"#).unwrap();
        assert_eq!(cfg.gamma, 1.0);
        assert_eq!(cfg.nbar, 0.05);
        assert_eq!(cfg.t_final, 50.0);
        assert_eq!(cfg.resolved_cutoffs(), vec![4, 4]);
        assert_eq!(cfg.generator().unwrap().channels.len(), 5);
    }

    #[test]
    fn w_default_cutoffs() {
        let cfg = ScenarioConfig::preset(Scenario::W, &[("gamma_10", 50.0), ("gamma_j", 50.0)]).with_modes(4);
        assert_eq!(cfg.resolved_cutoffs(), vec![4, 3, 3, 3]);
        let cfg = cfg.with_modes(3);
        assert_eq!(cfg.resolved_cutoffs(), vec![4, 3, 3]);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = ScenarioConfig::from_json(r#"{"scenario": "bell", "rates": {}}"#).unwrap_err();
        assert!(err.to_string().contains("rates.gamma0"), "{err}");
        assert_eq!(err.exit_code(), 2);

        let err = ScenarioConfig::from_json(r#"{"scenario": "bell", "rates": {"gamma0": 1}, "nbar": -1}"#)
            .unwrap_err();
        assert!(err.to_string().contains("nbar"));

        let err = ScenarioConfig::from_json("{\n  \"scenario\": \"bell\",\n  \"ratez\": {}\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");

        let err = ScenarioConfig::from_json(r#"{"scenario": "w", "rates": {"gamma_10": 1, "gamma_j": 1}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("n_modes"));

        let err = ScenarioConfig::from_json(
            r#"{"scenario": "bell", "rates": {"gamma0": 1}, "cutoffs": [4, 4, 4]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("cutoffs"));
    }

    #[test]
    fn custom_scenario() {
        let text = r#"{
            "scenario": "custom",
            "cutoffs": [4],
            "channels": [
                {"mode": 0, "type": "selective_absorption", "ell": 0, "rate": 5},
                {"mode": 0, "type": "thermal_emission", "rate": 1.05}
            ],
            "target": {"kind": "bell_plus"}
        }"#;
        let err = ScenarioConfig::from_json(text).unwrap_err();
        assert!(err.to_string().contains("cutoffs"), "{err}");

        let text = r#"{
            "scenario": "custom",
            "cutoffs": [4, 3],
            "channels": [
                {"mode": 0, "type": "selective_absorption", "ell": 0, "rate": 5},
                {"mode": 1, "type": "cooling", "rate": 5}
            ],
            "target": {"kind": "bell_plus"}
        }"#;
        let cfg = ScenarioConfig::from_json(text).unwrap();
        assert_eq!(cfg.generator().unwrap().channels.len(), 2);
    }

    #[test]
    fn set_param_accepts_rate_keys() {
        let mut cfg = ScenarioConfig::preset(Scenario::Bell, &[("gamma0", 10.0)]);
        cfg.set_param("gamma0", 25.0).unwrap();
        cfg.set_param("rates.gamma0", 30.0).unwrap();
        cfg.set_param("nbar", 0.0).unwrap();
        assert_eq!(cfg.rates["gamma0"], 30.0);
        assert_eq!(cfg.nbar, 0.0);
        assert!(cfg.set_param("gamma_minus", 1.0).is_err());
    }

    #[test]
    fn design_config_forms() {
        let cfg = DesignConfig::from_json(r#"{"omega0": 5e5, "gamma": 7.5}"#).unwrap();
        let p = cfg.drive_params().unwrap();
        assert_eq!(p.detuning, 5e6);
        assert!(DesignConfig::from_json("{}").is_err());
        let text = serde_json::to_string(&DesignConfig {
            drive: Some(p),
            omega0: None,
            lambda: Some(1e7),
            gamma: None,
            n_max: 2,
        })
        .unwrap();
        let back = DesignConfig::from_json(&text).unwrap();
        assert_eq!(back.drive_params().unwrap().lambda, Some(1e7));
    }
}
