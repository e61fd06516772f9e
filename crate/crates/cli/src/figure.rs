//! Plotting data: log10 estimates with ±2 SE bands on an x grid.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use wishart_tail::estimators::{run, EstimateSummary, Method, RunSpec};
use wishart_tail::tracywidom::{tw_corrected_tail, tw_tail};
use wishart_tail::Error;

use crate::record::cell;
use crate::{open_output, DmcRoute, ModelArgs, DEFAULT_DMC_ITERATIONS, DEFAULT_IS_ITERATIONS, DEFAULT_SEED};

#[derive(Args)]
pub struct FigureArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// First grid point.
    #[arg(long)]
    x_from: f64,
    /// Last grid point.
    #[arg(long)]
    x_to: f64,
    /// Number of equally spaced grid points.
    #[arg(long, default_value_t = 10)]
    x_points: usize,
    #[arg(long, default_value_t = DEFAULT_IS_ITERATIONS)]
    iterations_is: u64,
    #[arg(long, default_value_t = DEFAULT_DMC_ITERATIONS)]
    iterations_dmc: u64,
    #[arg(long, value_enum, default_value_t = DmcRoute::Tridiag)]
    dmc: DmcRoute,
    /// Proposal rate override for importance sampling.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, env = "WT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub const HEADER: [&str; 16] = [
    "x",
    "log10_is",
    "log10_is_lo",
    "log10_is_hi",
    "log10_dmc",
    "log10_dmc_lo",
    "log10_dmc_hi",
    "log10_tw",
    "log10_tw_lo",
    "log10_tw_hi",
    "log10_ctw",
    "log10_ctw_lo",
    "log10_ctw_hi",
    "tw",
    "ctw",
    "ctw_negative",
];

fn log10(v: f64) -> Option<f64> {
    (v > 0.0 && v.is_finite()).then(|| v.log10())
}

/// log10 of the estimate and of estimate ∓ 2 SE; the lower bound is empty
/// when it is not positive.
pub fn band(s: &EstimateSummary) -> [Option<f64>; 3] {
    let se = if s.se.is_finite() { s.se } else { 0.0 };
    [log10(s.estimate), log10(s.estimate - 2.0 * se), log10(s.estimate + 2.0 * se)]
}

pub fn grid(from: f64, to: f64, points: usize) -> Result<Vec<f64>, Error> {
    if points == 0 || !(from.is_finite() && to.is_finite()) || (points == 1 && from != to) || from > to {
        return Err(Error::InvalidParameter(format!(
            "need finite x_from <= x_to and at least one point (x_from = x_to for one point), got {from}, {to}, {points}"
        )));
    }
    if points == 1 {
        return Ok(vec![from]);
    }
    let step = (to - from) / (points - 1) as f64;
    Ok((0..points).map(|i| if i + 1 == points { to } else { from + step * i as f64 }).collect())
}

pub fn cmd_figure_data(args: &FigureArgs) -> Result<()> {
    let config = args.model.config()?;
    let xs = grid(args.x_from, args.x_to, args.x_points)?;
    let mut out = csv::Writer::from_writer(open_output(args.out.as_ref())?);
    out.write_record(HEADER)?;
    for (i, &x) in xs.iter().enumerate() {
        let seed = args.seed.wrapping_add(i as u64);
        let is = run(&RunSpec::new(config, x, Method::Is, args.iterations_is, seed)
            .with_rate(args.rate)
            .with_workers(args.workers))?;
        let dmc = run(&RunSpec::new(config, x, args.dmc.method(), args.iterations_dmc, seed.wrapping_add(1 << 32))
            .with_workers(args.workers))?;
        let (tw, ctw) = (tw_tail(&config, x), tw_corrected_tail(&config, x));
        let mut row = vec![x.to_string()];
        row.extend(band(&is).map(cell));
        row.extend(band(&dmc).map(cell));
        for v in [tw, ctw] {
            row.extend([log10(v); 3].map(cell));
        }
        row.push(tw.to_string());
        row.push(ctw.to_string());
        row.push(u8::from(ctw < 0.0).to_string());
        out.write_record(&row)?;
        out.flush()?;
    }
    Ok(())
}
