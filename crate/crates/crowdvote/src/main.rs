use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crowdvote::config::parse_schemes;
use crowdvote::experiment::{run_analytic, run_estimate, run_oracle_check, run_point, run_sweep, sweep_table};
use crowdvote::report::Table;
use crowdvote::{CliError, ExperimentConfig, ParamModeName};

#[derive(Parser)]
#[command(name = "crowdvote", version, about = "Crowdsourced classification with a reject option and spammers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo P_c of each scheme at one configuration.
    Simulate(Common),
    /// One simulation per sweep value (mu or spammer count).
    Sweep(Common),
    /// Per-trial parameter estimates against ground truth.
    Estimate(Common),
    /// Analytic P_c by configuration enumeration.
    Analytic(Common),
    /// Brute force vs analytic vs Monte Carlo on a tiny crowd.
    OracleCheck(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scheme name or `all`.
    #[arg(long)]
    scheme: Option<String>,
    /// `truth` or `estimated`.
    #[arg(long)]
    param_mode: Option<String>,
    /// Also print a plain-text table to stderr.
    #[arg(long)]
    table: bool,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        let text = std::fs::read_to_string(&self.config)
            .map_err(|e| CliError::Config(format!("{}: {e}", self.config.display())))?;
        let mut config: ExperimentConfig = text.parse()?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        if let Some(s) = &self.scheme {
            config.schemes = parse_schemes(s).ok_or_else(|| CliError::Config(format!("unknown scheme `{s}`")))?;
        }
        if let Some(p) = &self.param_mode {
            config.param_mode =
                ParamModeName::from_name(p).ok_or_else(|| CliError::Config(format!("unknown param mode `{p}`")))?;
        }
        config.validate()?;
        Ok(config)
    }

    fn emit(&self, table: &Table) -> Result<(), CliError> {
        match &self.out {
            Some(path) => table.write_csv(BufWriter::new(File::create(path)?))?,
            None => table.write_csv(io::stdout().lock())?,
        }
        if self.table {
            io::stderr().write_all(table.to_text().as_bytes())?;
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let config = args.load()?;
            let point = run_point(&config)?;
            args.emit(&Table::from_results(&point.rows))?;
            if point.estimation_failures > 0 {
                eprintln!("estimation impossible on {} of {} trials", point.estimation_failures, point.trials);
            }
            if point.all_estimation_failed() {
                return Err(CliError::AllEstimationFailed(point.trials));
            }
        }
        Command::Sweep(args) => {
            let config = args.load()?;
            let points = run_sweep(&config)?;
            args.emit(&sweep_table(&points))?;
            let failures: u64 = points.iter().map(|p| p.estimation_failures).sum();
            if failures > 0 {
                eprintln!("estimation impossible on {failures} trials across the sweep");
            }
            if points.iter().all(|p| p.all_estimation_failed()) {
                return Err(CliError::AllEstimationFailed(points.iter().map(|p| p.trials).sum()));
            }
        }
        Command::Estimate(args) => {
            let config = args.load()?;
            let report = run_estimate(&config)?;
            args.emit(&report.table)?;
            if report.failures == report.trials {
                return Err(CliError::AllEstimationFailed(report.trials));
            }
        }
        Command::Analytic(args) => {
            let config = args.load()?;
            args.emit(&run_analytic(&config)?)?;
        }
        Command::OracleCheck(args) => {
            let config = args.load()?;
            args.emit(&run_oracle_check(&config)?.table)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
