use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bosonet_cli::{design, run_to_file, sweep, CliError, DesignConfig, Result, RunOutput, ScenarioConfig};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bosonet", version, about = "Dissipative state preparation in bosonic networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one scenario and write its observables as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output file; defaults to the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario once per value of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Parameter name, e.g. `gamma0`, `rates.gamma0` or `nbar`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        /// Directory for one CSV per value.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Effective couplings, achievable rates and regime checks of a drive.
    Design {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Parse and check a scenario or design config without running it.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

fn summary(out: &RunOutput) -> String {
    let m = &out.metadata;
    let mut s = format!(
        "F = {:.4}  P = {:.4}  at gamma t = {:.3}{}",
        out.final_fidelity(),
        out.final_purity(),
        m.horizon,
        if m.stationary { " (stationary)" } else { "" }
    );
    if let Some(ss) = &m.steady {
        s.push_str(&format!("; steady F = {:.4}  P = {:.4}", ss.fidelity, ss.purity));
    }
    s
}

fn validate(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))?;
    if value.get("scenario").is_some() {
        let cfg = ScenarioConfig::from_json(&text)?;
        Ok(format!("ok: scenario {:?}, cutoffs {:?}", cfg.scenario, cfg.resolved_cutoffs()))
    } else {
        DesignConfig::from_json(&text)?;
        Ok("ok: design config".into())
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            let (output, path) = run_to_file(&cfg, out.as_deref())?;
            match path {
                Some(p) => eprintln!("wrote {}", p.display()),
                None => output.write_csv(std::io::stdout().lock())?,
            }
            eprintln!("{}", summary(&output));
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            let points = sweep(&cfg, &param, &values, out.as_deref())?;
            let mut failed = 0;
            for p in &points {
                match &p.output {
                    Ok(o) => println!("{param} = {}: {}", p.value, summary(o)),
                    Err(e) => {
                        failed += 1;
                        println!("{param} = {}: error: {e}", p.value);
                    }
                }
            }
            if failed > 0 {
                let msg = format!("{failed} of {} sweep points failed", points.len());
                let all_config = points
                    .iter()
                    .filter_map(|p| p.output.as_ref().err())
                    .all(|e| matches!(e, CliError::Config(_)));
                return Err(if all_config {
                    CliError::Config(msg)
                } else {
                    bosonet::Error::Solver(msg).into()
                });
            }
        }
        Command::Design { config, format } => {
            let cfg = DesignConfig::from_path(&config)?;
            let report = design(&cfg)?;
            match format {
                Format::Text => print!("{report}"),
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?
                ),
            }
        }
        Command::ValidateConfig { config } => println!("{}", validate(&config)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
