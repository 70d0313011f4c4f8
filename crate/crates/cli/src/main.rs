mod commands;
mod data;
mod error;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use hgld::Parametrization;
use serde::Serialize;

use crate::error::CliError;

/// Hurdle GLD and GPD models for zero-inflated heavy-tailed data.
#[derive(Debug, Parser, Serialize)]
#[command(name = "hgld", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Input CSV file with a header row.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Response column.
    #[arg(long, global = true)]
    pub response: Option<String>,
    /// Covariates of the non-zero part (comma list).
    #[arg(long, global = true, value_delimiter = ',')]
    pub covariates: Vec<String>,
    /// Covariates of the zero part (comma list); defaults to --covariates.
    #[arg(long, global = true, value_delimiter = ',')]
    pub zero_covariates: Option<Vec<String>>,
    #[arg(long, global = true, value_enum, default_value_t = ParamChoice::Both)]
    pub parametrization: ParamChoice,
    /// Responses strictly below this value become 0.
    #[arg(long, global = true)]
    pub truncate: Option<f64>,
    /// Replace non-zero responses by their natural log.
    #[arg(long, global = true)]
    pub log: bool,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Simulation replicates (simulate) or interval replicates (regressions).
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    /// Interval level: intervals cover 1 - alpha.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, global = true, default_value = "hgld-out")]
    pub out: PathBuf,
    /// GPD threshold; defaults to the smallest non-zero response.
    #[arg(long, global = true)]
    pub gpd_threshold: Option<f64>,
    /// Quasi-random shape candidates of the initial search.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub candidates: usize,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Fit a GLD to the response by maximum likelihood.
    Fit,
    /// Fit the zero proportion plus a GLD to the non-zero responses.
    FitHurdle,
    /// GLD regression of the response on the covariates.
    Regress,
    /// Logistic zero part plus GLD regression on the non-zero rows.
    HurdleRegress,
    /// Fit the zero proportion plus a GPD to the non-zero responses.
    FitGpd,
    /// Logistic zero part plus a log-link GPD regression.
    HurdleRegressGpd,
    /// Distances from the RS, FKML and GPD fits to a kernel estimate.
    Compare,
    /// Monte Carlo study of the hurdle regression estimator.
    Simulate {
        /// Scenario name, or `all`.
        #[arg(long, default_value = "all")]
        scenario: String,
        /// Sample sizes (comma list).
        #[arg(long, value_delimiter = ',', default_values_t = [100, 200, 1000])]
        sizes: Vec<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fit => "fit",
            Command::FitHurdle => "fit-hurdle",
            Command::Regress => "regress",
            Command::HurdleRegress => "hurdle-regress",
            Command::FitGpd => "fit-gpd",
            Command::HurdleRegressGpd => "hurdle-regress-gpd",
            Command::Compare => "compare",
            Command::Simulate { .. } => "simulate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamChoice {
    Rs,
    Fkml,
    Both,
}

impl ParamChoice {
    pub fn list(self) -> Vec<Parametrization> {
        match self {
            ParamChoice::Rs => vec![Parametrization::Rs],
            ParamChoice::Fkml => vec![Parametrization::Fkml],
            ParamChoice::Both => vec![Parametrization::Rs, Parametrization::Fkml],
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match commands::run(&cli) {
        Ok(outcome) => {
            let elapsed = start.elapsed().as_secs_f64();
            if let Err(e) = outcome.out.write_timing(elapsed) {
                eprintln!("hgld: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
            if outcome.unconverged.is_empty() {
                ExitCode::SUCCESS
            } else {
                let e = CliError::NonConvergence(outcome.unconverged.join(", "));
                eprintln!("hgld: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        }
        Err(e) => {
            eprintln!("hgld: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
