//! Command-line front end for `thetapair`: CSV ingestion, estimator and
//! bootstrap configuration, report rendering and simulation utilities.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod ingest;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thetapair::{Seed, SinhArcsinhParams, DEFAULT_REPLICATES};

pub use commands::{
    density_curve, estimate_command, estimate_on, export_replicates, load_data, oracle_command, simulate_command,
    EstimateOutput, OracleValues, DATA_STREAM,
};
pub use config::{parse_methods, DataSource, OutputFormat, RunConfig};
pub use error::CliError;
pub use ingest::{ingest_csv, parse_csv};
pub use report::{Bounds, IntervalCell, ReportRow, ThetaReport};

#[derive(Debug, Parser)]
#[command(name = "thetapair", version, about = "Estimate P(X < Y) from paired samples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point estimates and bootstrap confidence intervals for each estimator.
    Estimate(EstimateArgs),
    /// Draw a sinh-arcsinh sample and write it as CSV.
    Simulate(SimulateArgs),
    /// Quadrature values of θ, the independence baseline and the correlation.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("data").required(true).args(["input", "simulate"]))]
pub struct EstimateArgs {
    /// Two-column CSV of (x, y) couples.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Draw the data from the sinh-arcsinh model instead of reading a file.
    #[arg(long)]
    pub simulate: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated estimators, or `all`.
    #[arg(long, default_value = "all")]
    pub estimators: String,
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = DEFAULT_REPLICATES)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; defaults to all cores. Output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Write bootstrap replicates and their density curves to this directory.
    #[arg(long, value_name = "DIR")]
    pub export_replicates: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// σ1,σ2,ρ,ε1,ε2,δ1,δ2
    #[arg(long, value_name = "LIST", value_parser = parse_params, default_value = "1,1,0.75,0,1,1,2")]
    pub params: SinhArcsinhParams,
    /// Sample size.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// σ1,σ2,ρ,ε1,ε2,δ1,δ2
    #[arg(long, value_name = "LIST", value_parser = parse_params, default_value = "1,1,0.75,0,1,1,2")]
    pub params: SinhArcsinhParams,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

fn parse_params(s: &str) -> Result<SinhArcsinhParams, String> {
    SinhArcsinhParams::parse(s).map_err(|e| e.to_string())
}

impl EstimateArgs {
    pub fn to_config(&self) -> Result<RunConfig, CliError> {
        let source = match (&self.input, self.simulate) {
            (Some(path), false) => DataSource::Input(path.clone()),
            (None, true) => DataSource::Simulate {
                params: self.model.params,
                n: self.model.n,
            },
            _ => return Err(CliError::Usage("give exactly one of --input and --simulate".into())),
        };
        let cfg = RunConfig {
            source,
            methods: parse_methods(&self.estimators)?,
            replicates: self.replicates,
            level: self.level,
            seed: Seed(self.seed),
            format: self.format,
            export_dir: self.export_replicates.clone(),
            out: self.out.clone(),
            threads: self.threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` and runs the selected command, returning the process exit
/// status: 0 on success, 1 for usage errors, 2 for data errors and 3 for
/// numerical failures.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Estimate(args) => {
            let cfg = args.to_config()?;
            let output = estimate_command(&cfg)?;
            emit(&output.report.render(cfg.format), cfg.out.as_deref(), stdout)?;
            if let Some(dir) = &cfg.export_dir {
                export_replicates(dir, &output.bootstraps)?;
            }
            let rows = &output.report.rows;
            if rows.iter().all(|r| r.error.is_some()) {
                return Err(CliError::Data("every estimator failed".into()));
            }
            for row in rows.iter().filter(|r| r.error.is_some()) {
                let _ = writeln!(stderr, "warning: {} failed", row.method);
            }
            Ok(())
        }
        Command::Simulate(args) => {
            let text = simulate_command(&args.model.params, args.model.n, Seed(args.seed))?;
            emit(&text, args.out.as_deref(), stdout)
        }
        Command::Oracle(args) => {
            let values = oracle_command(&args.params, args.tol)?;
            emit(&values.render(args.format), None, stdout)
        }
    }
}

fn emit(text: &str, out: Option<&std::path::Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => commands::write_file(path, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("writing standard output", e)),
    }
}
