//! `wtail`: command-line front end for the Wishart tail estimators.

mod figure;
mod record;
mod selftest;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use wishart_tail::estimators::Method;
use wishart_tail::{Beta, Error, ModelConfig};

use crate::record::{EstimateMethod, Format};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_IS_ITERATIONS: u64 = 10_000;
pub const DEFAULT_DMC_ITERATIONS: u64 = 1_000_000;

#[derive(Parser)]
#[command(name = "wtail", version, about = "Tail probabilities of the largest-eigenvalue-to-trace ratio of Wishart matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate Pr(U > x) for one configuration and one or more thresholds.
    Estimate(EstimateArgs),
    /// Regenerate one of the reference tables as CSV.
    Table(table::TableArgs),
    /// Emit plotting data (log10 estimates with ±2 SE bands) over an x grid.
    FigureData(figure::FigureArgs),
    /// Run the built-in invariant checks.
    Selftest(selftest::SelftestArgs),
    /// Export the tabulated Tracy–Widom distribution functions as CSV.
    TwGrid(TwGridArgs),
}

#[derive(Args, Clone)]
pub struct ModelArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    /// 1 for real, 2 for complex entries.
    #[arg(long, value_parser = parse_beta)]
    pub beta: Beta,
}

impl ModelArgs {
    pub fn config(&self) -> Result<ModelConfig> {
        Ok(ModelConfig::new(self.n, self.p, self.beta)?)
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Threshold; repeat for several values.
    #[arg(long, required = true, num_args = 1)]
    x: Vec<f64>,
    /// Number of leading eigenvalues in the numerator.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, value_enum, default_value_t = EstimateMethod::Is)]
    method: EstimateMethod,
    /// Iterations per stochastic method (default 10⁴ for is, 10⁶ for dmc).
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long, env = "WT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Proposal rate override for importance sampling.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report per-iteration wall time (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct TwGridArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum DmcRoute {
    Dense,
    Tridiag,
}

impl DmcRoute {
    pub fn method(self) -> Method {
        match self {
            DmcRoute::Dense => Method::DmcDense,
            DmcRoute::Tridiag => Method::DmcTridiag,
        }
    }
}

fn parse_beta(s: &str) -> std::result::Result<Beta, String> {
    let v: u8 = s.parse().map_err(|_| format!("beta must be 1 or 2, got {s:?}"))?;
    Beta::try_from(v).map_err(|e| e.to_string())
}

pub fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_estimate(args: &EstimateArgs) -> Result<()> {
    let config = args.model.config()?;
    let request = record::EstimateRequest {
        config,
        k: args.k,
        iterations: args.iterations,
        seed: args.seed,
        workers: args.workers,
        rate: args.rate,
        timing: args.timing,
    };
    let mut records = Vec::new();
    for &x in &args.x {
        for &method in args.method.expand() {
            records.push(request.record(x, method)?);
        }
    }
    let mut out = open_output(args.out.as_ref())?;
    record::write_records(&mut out, &records, args.format)?;
    out.flush()?;
    Ok(())
}

fn cmd_tw_grid(args: &TwGridArgs) -> Result<()> {
    let mut out = open_output(args.out.as_ref())?;
    wishart_tail::tracywidom::write_grid_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

/// 2 for parameter and domain errors, 3 for numerical failures, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(
            Error::InvalidParameter(_) | Error::Domain(_) | Error::NonRareRegime { .. } | Error::UndefinedRatio(_),
        ) => 2,
        Some(Error::SupportViolation(_) | Error::Numerical { .. }) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Table(a) => table::cmd_table(a),
        Command::FigureData(a) => figure::cmd_figure_data(a),
        Command::Selftest(a) => return selftest::cmd_selftest(a),
        Command::TwGrid(a) => cmd_tw_grid(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
