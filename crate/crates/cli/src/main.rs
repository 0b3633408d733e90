//! lpstat: LP-score nonparametric statistics on CSV data.
//!
//! Subcommands cover the full pipeline: quantile diagnostics (`summarize`),
//! score functions (`scores`), LP comoments with the AIC-selected LPINFOR
//! dependence measure and chi-square test (`comoments`), copula density
//! estimation (`copula`), comparison-density marginal density estimation
//! (`density`), score-series regression (`regress`), and all-pairs
//! dependence screening (`screen`).
//!
//! Exit codes: 0 ok, 2 usage, 3 data error, 4 numerical failure.

mod commands;
mod dataset;
mod errors;
mod report;
mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::{EstimatorChoice, Inputs};
use dataset::Dataset;
use errors::{CliError, CliResult};
use lpstat_core::compdensity::StartFamily;
use lpstat_core::regression::Selection;
use report::{emit, CommandOutput, ConfigEcho, OutputFormat};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "lpstat",
    version,
    about = "LP-score nonparametric statistics on CSV data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantile functions and the informative quantile per column
    Summarize(CommonArgs),
    /// Orthonormal score functions S_1..S_m as step plots
    Scores(CommonArgs),
    /// LP comoment matrix, AIC selection, LPINFOR, chi-square test
    Comoments(CommonArgs),
    /// Copula density estimate (L2 series or MaxEnt) with slices
    Copula(CommonArgs),
    /// Marginal density via comparison density against a parametric start
    Density(CommonArgs),
    /// Score-series nonparametric regression with R_LP and R_GINI
    Regress(CommonArgs),
    /// Rank all column pairs by LPINFOR
    Screen(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Summarize(_) => "summarize",
            Command::Scores(_) => "scores",
            Command::Comoments(_) => "comoments",
            Command::Copula(_) => "copula",
            Command::Density(_) => "density",
            Command::Regress(_) => "regress",
            Command::Screen(_) => "screen",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Summarize(a)
            | Command::Scores(a)
            | Command::Comoments(a)
            | Command::Copula(a)
            | Command::Density(a)
            | Command::Regress(a)
            | Command::Screen(a) => a,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Input CSV file (header row required)
    #[arg(long)]
    input: PathBuf,
    /// X column name
    #[arg(long)]
    x: Option<String>,
    /// Y column name
    #[arg(long)]
    y: Option<String>,
    /// Number of score functions per margin
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Parametric start for the density command
    #[arg(long, value_enum, default_value_t = StartArg::Normal)]
    start: StartArg,
    /// Copula estimator
    #[arg(long, value_enum, default_value_t = EstimatorArg::L2)]
    estimator: EstimatorArg,
    /// Output format
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Coefficient selection for the regress command
    #[arg(long, value_enum, default_value_t = SelectArg::Aic)]
    select: SelectArg,
    /// Seed for Monte-Carlo diagnostics
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for file formats
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the accept-reject goodness-of-fit diagnostic (density command)
    #[arg(long)]
    gof: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StartArg {
    Normal,
    Uniform,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EstimatorArg {
    L2,
    Maxent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SelectArg {
    Aic,
    All,
}

fn main() {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(stdout_text) => {
            print!("{stdout_text}");
            std::io::stdout().flush().ok();
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(command: &Command) -> CliResult<String> {
    let args = command.args();
    if args.m == 0 {
        return Err(CliError::Usage("--m must be at least 1".into()));
    }
    let dataset = Dataset::load(&args.input)?;
    let inputs = Inputs {
        dataset: &dataset,
        x: args.x.as_deref(),
        y: args.y.as_deref(),
        m: args.m,
        start: match args.start {
            StartArg::Normal => StartFamily::Normal,
            StartArg::Uniform => StartFamily::Uniform,
            StartArg::Exponential => StartFamily::Exponential,
        },
        estimator: match args.estimator {
            EstimatorArg::L2 => EstimatorChoice::L2,
            EstimatorArg::Maxent => EstimatorChoice::MaxEnt,
        },
        select: match args.select {
            SelectArg::Aic => Selection::Aic,
            SelectArg::All => Selection::All,
        },
        seed: args.seed,
        gof: args.gof,
    };
    let output: CommandOutput = match command {
        Command::Summarize(_) => commands::cmd_summarize(&inputs)?,
        Command::Scores(_) => commands::cmd_scores(&inputs)?,
        Command::Comoments(_) => commands::cmd_comoments(&inputs)?,
        Command::Copula(_) => commands::cmd_copula(&inputs)?,
        Command::Density(_) => commands::cmd_density(&inputs)?,
        Command::Regress(_) => commands::cmd_regress(&inputs)?,
        Command::Screen(_) => commands::cmd_screen(&inputs)?,
    };
    let config = ConfigEcho {
        input: args.input.display().to_string(),
        x: args.x.clone(),
        y: args.y.clone(),
        m: args.m,
        start: format!("{:?}", args.start).to_lowercase(),
        estimator: format!("{:?}", args.estimator).to_lowercase(),
        format: format!("{:?}", args.format).to_lowercase(),
        select: format!("{:?}", args.select).to_lowercase(),
        seed: args.seed,
        out: args.out.as_ref().map(|p| p.display().to_string()),
        gof: args.gof,
    };
    let format = match args.format {
        FormatArg::Json => OutputFormat::Json,
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Svg => OutputFormat::Svg,
    };
    emit(command.name(), config, format, args.out.as_deref(), output)
}
