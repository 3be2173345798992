use std::io::Write;
use std::path::{Path, PathBuf};

use bosonet::dynamics::{
    evolve, fidelity, purity, steady_state, EvolveOptions, SteadyStateMethod, SteadyStateOptions,
};
use bosonet::liouvillian::assemble;
use bosonet::states::{target_state, thermal_state, Basis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};

/// Stationary state summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadySummary {
    pub fidelity: f64,
    pub purity: f64,
    pub residual: f64,
    pub method: SteadyStateMethod,
    pub unique: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub config: ScenarioConfig,
    pub cutoffs: Vec<usize>,
    pub hilbert_dim: usize,
    /// `γt` at which the run stopped.
    pub horizon: f64,
    pub stationary: bool,
    /// `‖L[ρ]‖∞` at the last output point, in units of `γ`.
    pub final_residual: f64,
    /// Step used, in `γt`.
    pub dt: f64,
    pub halvings: u32,
    pub max_trace_drift: f64,
    pub min_eigenvalue: f64,
    pub steady: Option<SteadySummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub t_gamma: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub purity: Vec<f64>,
    /// Mean occupation of each normal mode, one row per output point.
    pub occupations: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub metadata: Metadata,
    pub series: Series,
}

impl RunOutput {
    pub fn final_fidelity(&self) -> f64 {
        *self.series.fidelity.last().unwrap_or(&f64::NAN)
    }

    pub fn final_purity(&self) -> f64 {
        *self.series.purity.last().unwrap_or(&f64::NAN)
    }

    pub fn n_modes(&self) -> usize {
        self.metadata.cutoffs.len()
    }

    /// CSV with a `#`-prefixed metadata header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let meta = serde_json::to_string(&self.metadata).map_err(|e| CliError::config(e.to_string()))?;
        writeln!(out, "# {}", self.metadata.version).map_err(|e| CliError::io("output", e))?;
        writeln!(out, "# metadata: {meta}").map_err(|e| CliError::io("output", e))?;
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t_gamma".to_string(), "fidelity".into(), "purity".into()];
        header.extend((1..=self.n_modes()).map(|m| format!("n_mode_{m}")));
        w.write_record(&header)?;
        let s = &self.series;
        for i in 0..s.t_gamma.len() {
            let mut row = vec![s.t_gamma[i].to_string(), s.fidelity[i].to_string(), s.purity[i].to_string()];
            row.extend(s.occupations[i].iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| CliError::io("output", e))?;
        Ok(())
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

pub fn version() -> String {
    format!("bosonet-cli {}", env!("CARGO_PKG_VERSION"))
}

/// Build the generator, start from the thermal state, evolve, and
/// optionally solve for the stationary state. Nothing is written.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let gen = cfg.generator()?;
    let space = gen.space.clone();
    let l = assemble(&gen)?;
    let kind = cfg
        .target_kind()
        .ok_or_else(|| CliError::config("target: missing"))?;
    let target = target_state(kind, &space)?;
    let rho0 = thermal_state(&space, &vec![cfg.nbar; space.n_modes()], Basis::Normal)?;

    // physical time is γt / γ
    let g = cfg.gamma;
    let opts = EvolveOptions {
        dt: cfg.dt.map(|dt| dt / g),
        output_interval: cfg.output_interval / g,
        stationary_tol: Some(1e-8 * g),
        ..EvolveOptions::default().with_target(target.normal.clone())
    };
    let traj = evolve(&l, &rho0, cfg.t_final / g, &opts)?;

    let steady = if cfg.steady_state {
        let ss = steady_state(
            &l,
            &SteadyStateOptions {
                t_final: cfg.t_final / g,
                direct_tol: 1e-8 * g,
                integration_tol: 1e-6 * g,
                ..Default::default()
            },
        )?;
        Some(SteadySummary {
            fidelity: fidelity(&ss.rho, &target.normal)?,
            purity: purity(&ss.rho),
            residual: ss.residual / g,
            method: ss.method,
            unique: ss.unique,
        })
    } else {
        None
    };

    Ok(RunOutput {
        metadata: Metadata {
            version: version(),
            config: cfg.clone(),
            cutoffs: space.cutoffs().to_vec(),
            hilbert_dim: space.dim(),
            horizon: traj.horizon * g,
            stationary: traj.stationary,
            final_residual: traj.final_derivative / g,
            dt: traj.dt * g,
            halvings: traj.halvings,
            max_trace_drift: traj.max_trace_drift(),
            min_eigenvalue: traj.min_eigenvalue,
            steady,
        },
        series: Series {
            t_gamma: traj.times.iter().map(|t| t * g).collect(),
            fidelity: traj.fidelity.unwrap_or_default(),
            purity: traj.purity,
            occupations: traj.occupations,
        },
    })
}

/// Run and write to `out`, falling back to the config's `output`.
pub fn run_to_file(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<(RunOutput, Option<PathBuf>)> {
    let output = run_scenario(cfg)?;
    let path = out.map(Path::to_path_buf).or_else(|| cfg.output.clone());
    if let Some(p) = &path {
        output.write_to(p)?;
    }
    Ok((output, path))
}

/// Result of one sweep point.
#[derive(Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub config: ScenarioConfig,
    pub output: Result<RunOutput>,
    pub path: Option<PathBuf>,
}

fn point_path(dir: &Path, param: &str, value: f64) -> PathBuf {
    let key = param.strip_prefix("rates.").unwrap_or(param);
    dir.join(format!("{key}_{value}.csv"))
}

/// One independent run per value, in parallel. A failed point does not
/// stop the others. With `out_dir`, each run is written to
/// `<out_dir>/<param>_<value>.csv`.
pub fn sweep(template: &ScenarioConfig, param: &str, values: &[f64], out_dir: Option<&Path>) -> Result<Vec<SweepPoint>> {
    // reject unknown parameters before starting anything
    template.clone().set_param(param, values.first().copied().unwrap_or(1.0))?;
    let points = values
        .par_iter()
        .map(|&value| {
            let mut config = template.clone();
            let path = out_dir.map(|d| point_path(d, param, value));
            config.output = path.clone();
            let output = config
                .set_param(param, value)
                .and_then(|_| run_scenario(&config))
                .and_then(|o| {
                    if let Some(p) = &path {
                        o.write_to(p)?;
                    }
                    Ok(o)
                });
            SweepPoint {
                value,
                config,
                output,
                path,
            }
        })
        .collect();
    Ok(points)
}

/// Values at the nominal settings and at the two refinements used to check
/// that a discrepancy is not numerical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub base: StudyPoint,
    pub cutoff_plus_one: StudyPoint,
    pub horizon_doubled: StudyPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyPoint {
    pub cutoffs: Vec<usize>,
    pub t_final: f64,
    pub final_fidelity: f64,
    pub final_purity: f64,
    pub steady_fidelity: f64,
    pub steady_purity: f64,
}

fn study_point(cfg: &ScenarioConfig, evolve_run: bool) -> Result<StudyPoint> {
    let gen = cfg.generator()?;
    let l = assemble(&gen)?;
    let target = target_state(cfg.target_kind().expect("validated config"), &gen.space)?;
    let ss = steady_state(
        &l,
        &SteadyStateOptions {
            // refined spaces can exceed the automatic direct-solve limit
            method: Some(SteadyStateMethod::SparseLu),
            direct_tol: 1e-8 * cfg.gamma,
            ..Default::default()
        },
    )?;
    let (ff, fp) = if evolve_run {
        let out = run_scenario(&ScenarioConfig {
            steady_state: false,
            ..cfg.clone()
        })?;
        (out.final_fidelity(), out.final_purity())
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(StudyPoint {
        cutoffs: gen.space.cutoffs().to_vec(),
        t_final: cfg.t_final,
        final_fidelity: ff,
        final_purity: fp,
        steady_fidelity: fidelity(&ss.rho, &target.normal)?,
        steady_purity: purity(&ss.rho),
    })
}

/// Repeat a run with every cutoff raised by one, and with the horizon
/// doubled. The enlarged-space point only reports the stationary values.
pub fn convergence_study(cfg: &ScenarioConfig) -> Result<ConvergenceStudy> {
    cfg.validate()?;
    let base = study_point(cfg, true)?;
    let mut bigger = cfg.clone();
    bigger.cutoffs = Some(cfg.resolved_cutoffs().iter().map(|c| c + 1).collect());
    let cutoff_plus_one = study_point(&bigger, false)?;
    let mut longer = cfg.clone();
    longer.t_final *= 2.0;
    let horizon_doubled = study_point(&longer, true)?;
    Ok(ConvergenceStudy {
        base,
        cutoff_plus_one,
        horizon_doubled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scenario;

    fn short(cfg: ScenarioConfig) -> ScenarioConfig {
        ScenarioConfig {
            t_final: 2.0,
            output_interval: 0.1,
            ..cfg
        }
    }

    #[test]
    fn csv_layout() {
        let cfg = short(ScenarioConfig::preset(Scenario::Bell, &[("gamma0", 10.0)]));
        let out = run_scenario(&cfg).unwrap();
        let mut buf = Vec::new();
        out.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# bosonet-cli"));
        assert!(lines.next().unwrap().starts_with("# metadata: {"));
        assert_eq!(lines.next().unwrap(), "t_gamma,fidelity,purity,n_mode_1,n_mode_2");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), out.series.t_gamma.len());
        assert!(rows.iter().all(|r| r.split(',').count() == 5));
    }

    #[test]
    fn time_axis_is_scale_free() {
        let base = short(ScenarioConfig::preset(Scenario::Bell, &[("gamma0", 10.0)]));
        let a = run_scenario(&base).unwrap();
        let b = run_scenario(&ScenarioConfig { gamma: 7.5, ..base }).unwrap();
        assert_eq!(a.series.t_gamma.len(), b.series.t_gamma.len());
        for (x, y) in a.series.fidelity.iter().zip(&b.series.fidelity) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!((a.metadata.horizon - b.metadata.horizon).abs() < 1e-9);
    }

    #[test]
    fn empty_sweep() {
        let cfg = ScenarioConfig::preset(Scenario::Bell, &[("gamma0", 10.0)]);
        assert!(sweep(&cfg, "gamma0", &[], None).unwrap().is_empty());
        assert!(sweep(&cfg, "bogus", &[1.0], None).is_err());
    }

    #[test]
    fn failed_points_do_not_stop_the_sweep() {
        let cfg = short(ScenarioConfig::preset(Scenario::Bell, &[("gamma0", 10.0)]));
        let pts = sweep(&cfg, "nbar", &[0.0, -1.0, 0.05], None).unwrap();
        assert_eq!(pts.len(), 3);
        assert!(pts[0].output.is_ok());
        assert!(pts[1].output.is_err());
        assert!(pts[2].output.is_ok());
    }
}
