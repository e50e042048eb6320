//! Scenario-file driven front end: parses strict JSON inputs, runs one
//! command and renders a deterministic JSON or CSV report.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use npce_core::markov::SolverConfig;
use thiserror::Error;

pub mod commands;
pub mod file;

pub use commands::{
    cmd_optimize, cmd_oracle, cmd_parliament, cmd_solve, cmd_sweep, OracleSettings, Report, RunOptions, RunReport,
};
pub use file::{parse_scenario_file, parse_scenario_str, ScenarioFile, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid input:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),

    #[error(transparent)]
    Model(#[from] npce_core::Error),

    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    /// 2 for a failed solve, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(npce_core::Error::NonConvergence { .. }) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "npce", version, about = "Forecast outcomes of probabilistic Condorcet elections")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Victory matrix, limiting distribution and classification.
    Solve(CommonArgs),
    /// Re-solve over a range of one scenario parameter.
    Sweep(CommonArgs),
    /// Two-stage government formation model.
    Parliament(CommonArgs),
    /// Best allocation of the strategist's influence budget.
    Optimize(CommonArgs),
    /// Compare the solver with simulated chains.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Required by `oracle`; echoed by the deterministic commands.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the file's solver tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Overrides the file's iteration cap.
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Recorded transitions per replication.
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 10)]
    pub replications: usize,
    /// Defaults to a tenth of `--steps`.
    #[arg(long)]
    pub burn_in: Option<usize>,
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Solve(a) | Command::Sweep(a) | Command::Parliament(a) | Command::Optimize(a) => a,
            Command::Oracle(o) => &o.common,
        }
    }
}

/// A rendered report and whether every solve converged.
#[derive(Clone, Debug, PartialEq)]
pub struct Rendered {
    pub text: String,
    pub converged: bool,
}

fn render<R: Report>(report: &R, format: Format) -> Result<Rendered, CliError> {
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| CliError::Output(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => report.csv()?,
    };
    Ok(Rendered {
        text,
        converged: report.converged(),
    })
}

pub fn run_options(file: &ScenarioFile, args: &CommonArgs) -> Result<RunOptions, CliError> {
    let solver = SolverConfig {
        tolerance: args.tolerance.unwrap_or(file.solver.tolerance),
        max_iters: args.max_iters.unwrap_or(file.solver.max_iters),
    };
    if !(solver.tolerance > 0.0) {
        return Err(CliError::Invalid(vec!["--tolerance must be positive".into()]));
    }
    Ok(RunOptions { seed: args.seed, solver })
}

/// Parses the input file and runs the command.
pub fn run(command: &Command) -> Result<Rendered, CliError> {
    let args = command.common();
    let file = parse_scenario_file(&args.input)?;
    let options = run_options(&file, args)?;
    match command {
        Command::Solve(_) => render(&cmd_solve(&file, &options)?, args.format),
        Command::Sweep(_) => render(&cmd_sweep(&file, &options)?, args.format),
        Command::Parliament(_) => render(&cmd_parliament(&file, &options)?, args.format),
        Command::Optimize(_) => render(&cmd_optimize(&file, &options)?, args.format),
        Command::Oracle(o) => {
            let settings = OracleSettings {
                steps: o.steps,
                replications: o.replications,
                burn_in: o.burn_in,
            };
            render(&cmd_oracle(&file, &options, settings)?, args.format)
        }
    }
}
