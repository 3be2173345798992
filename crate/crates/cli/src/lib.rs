//! Scenario presets, configuration files and output for the `bosonet`
//! command-line tool.

pub mod config;
pub mod design;
pub mod error;
pub mod run;

pub use config::{DesignConfig, Scenario, ScenarioConfig};
pub use design::design;
pub use error::{CliError, Result};
pub use run::{
    convergence_study, run_scenario, run_to_file, sweep, ConvergenceStudy, RunOutput, SteadySummary,
    SweepPoint,
};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
