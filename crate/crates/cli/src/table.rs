//! Regeneration of the reference tables.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use wishart_tail::estimators::{run, EstimateSummary, Method, RunSpec};
use wishart_tail::tracywidom::{tw_corrected_tail, tw_tail};
use wishart_tail::{Beta, Error, ModelConfig};

use crate::record::cell;
use crate::{open_output, DmcRoute, DEFAULT_DMC_ITERATIONS, DEFAULT_IS_ITERATIONS, DEFAULT_SEED};

#[derive(Args)]
pub struct TableArgs {
    /// One of 1a-1d, 2a-2d, 3a, 3b, 4a-4c, 5a-5c.
    #[arg(long)]
    table: String,
    #[arg(long, default_value_t = DEFAULT_IS_ITERATIONS)]
    iterations_is: u64,
    #[arg(long, default_value_t = DEFAULT_DMC_ITERATIONS)]
    iterations_dmc: u64,
    /// Iterations per method for the timing tables.
    #[arg(long, default_value_t = 10_000)]
    iterations_timing: u64,
    /// Direct Monte Carlo sampler for the estimate tables.
    #[arg(long, value_enum, default_value_t = DmcRoute::Tridiag)]
    dmc: DmcRoute,
    #[arg(long, env = "WT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TableKind {
    /// k = 1 estimates with Tracy–Widom columns.
    Largest,
    /// Per-iteration timings.
    Timing,
    /// Top-k estimates.
    TopK(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableDef {
    pub kind: TableKind,
    pub beta: Beta,
    /// (n, p, x) rows.
    pub rows: Vec<(usize, usize, f64)>,
}

fn same_size(n: usize, p: usize, xs: &[f64]) -> Vec<(usize, usize, f64)> {
    xs.iter().map(|&x| (n, p, x)).collect()
}

pub fn lookup(id: &str) -> Result<TableDef, Error> {
    use TableKind::*;
    let (kind, beta, rows) = match id {
        "1a" => (Largest, Beta::Real, same_size(100, 10, &[1.80, 1.95, 1.98, 2.10, 2.30])),
        "1b" => (Largest, Beta::Real, same_size(100, 20, &[2.10, 2.30, 2.40, 2.50, 2.70])),
        "1c" => (Largest, Beta::Real, same_size(500, 20, &[1.46, 1.51, 1.56, 1.62, 1.70])),
        "1d" => (Largest, Beta::Real, same_size(1000, 50, &[1.52, 1.55, 1.60, 1.62, 1.66])),
        "2a" => (Largest, Beta::Complex, same_size(100, 10, &[1.77, 1.81, 1.91, 1.93, 1.99])),
        "2b" => (Largest, Beta::Complex, same_size(100, 20, &[2.10, 2.18, 2.30, 2.38, 2.46])),
        "2c" => (Largest, Beta::Complex, same_size(500, 20, &[1.45, 1.48, 1.50, 1.525, 1.55])),
        "2d" => (Largest, Beta::Complex, same_size(1000, 50, &[1.51, 1.53, 1.56, 1.58, 1.60])),
        "3a" => (
            Timing,
            Beta::Real,
            vec![
                (100, 10, 1.95),
                (100, 10, 1.98),
                (100, 20, 2.3),
                (100, 20, 2.4),
                (500, 20, 1.51),
                (500, 20, 1.56),
                (1000, 50, 1.55),
                (1000, 50, 1.6),
            ],
        ),
        "3b" => (
            Timing,
            Beta::Complex,
            vec![
                (100, 10, 1.77),
                (100, 10, 1.81),
                (100, 20, 2.18),
                (100, 20, 2.3),
                (500, 20, 1.45),
                (500, 20, 1.48),
                (1000, 50, 1.53),
                (1000, 50, 1.56),
            ],
        ),
        "4a" => (TopK(2), Beta::Real, same_size(100, 50, &[5.9, 6.0, 6.1, 6.4])),
        "4b" => (TopK(3), Beta::Real, same_size(100, 50, &[8.4, 8.5, 8.7, 8.9])),
        "4c" => (TopK(4), Beta::Real, same_size(100, 50, &[10.6, 10.8, 11.0, 11.3])),
        "5a" => (TopK(2), Beta::Complex, same_size(100, 50, &[5.6, 5.7, 5.8, 6.0])),
        "5b" => (TopK(3), Beta::Complex, same_size(100, 50, &[8.1, 8.2, 8.3, 8.5])),
        "5c" => (TopK(4), Beta::Complex, same_size(100, 50, &[10.4, 10.5, 10.6, 10.8])),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown table {other:?}; expected 1a-1d, 2a-2d, 3a, 3b, 4a-4c or 5a-5c"
            )))
        }
    };
    Ok(TableDef { kind, beta, rows })
}

pub fn header(kind: TableKind) -> &'static [&'static str] {
    const ESTIMATES: [&str; 9] =
        ["x", "EST_IS", "SD_IS", "SD_IS/EST_IS", "EST_DMC", "SD_DMC", "SD_DMC/EST_DMC", "c.TW", "TW"];
    match kind {
        TableKind::Largest => &ESTIMATES,
        TableKind::TopK(_) => &ESTIMATES[..7],
        TableKind::Timing => &["n", "p", "x", "T_DMC_1", "T_DMC_2", "T_IS"],
    }
}

fn estimate_cells(s: &EstimateSummary) -> [String; 3] {
    let est = s.estimate.is_finite().then_some(s.estimate);
    let sd = s.sd.is_finite().then_some(s.sd);
    [cell(est), cell(sd), cell(s.rel_sd.filter(|v| v.is_finite()))]
}

pub fn cmd_table(args: &TableArgs) -> Result<()> {
    let def = lookup(&args.table)?;
    let mut out = csv::Writer::from_writer(open_output(args.out.as_ref())?);
    out.write_record(header(def.kind))?;
    for (i, &(n, p, x)) in def.rows.iter().enumerate() {
        let config = ModelConfig::new(n, p, def.beta)?;
        let seed = args.seed.wrapping_add(i as u64);
        let go = |method: Method, iterations: u64, seed: u64| -> Result<EstimateSummary> {
            let k = match def.kind {
                TableKind::TopK(k) => k,
                _ => 1,
            };
            let spec = RunSpec::new(config, x, method, iterations, seed).with_k(k).with_workers(args.workers);
            Ok(run(&spec)?)
        };
        let row: Vec<String> = match def.kind {
            TableKind::Timing => {
                let t = |m| go(m, args.iterations_timing, seed).map(|s| s.per_iter_seconds.to_string());
                vec![n.to_string(), p.to_string(), x.to_string(), t(Method::DmcDense)?, t(Method::DmcTridiag)?, t(Method::Is)?]
            }
            kind => {
                let is = go(Method::Is, args.iterations_is, seed)?;
                let dmc = go(args.dmc.method(), args.iterations_dmc, seed.wrapping_add(1 << 32))?;
                let mut row = vec![x.to_string()];
                row.extend(estimate_cells(&is));
                row.extend(estimate_cells(&dmc));
                if kind == TableKind::Largest {
                    row.push(tw_corrected_tail(&config, x).to_string());
                    row.push(tw_tail(&config, x).to_string());
                }
                row
            }
        };
        out.write_record(&row)?;
        out.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_resolves() {
        for id in ["1a", "1b", "1c", "1d", "2a", "2b", "2c", "2d", "3a", "3b", "4a", "4b", "4c", "5a", "5b", "5c"] {
            let def = lookup(id).unwrap();
            assert!(!def.rows.is_empty());
        }
        assert!(matches!(lookup("6a"), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn column_sets() {
        assert_eq!(header(TableKind::Largest).len(), 9);
        assert_eq!(header(TableKind::TopK(2)).len(), 7);
        assert_eq!(header(TableKind::Timing)[3], "T_DMC_1");
        assert_eq!(lookup("5b").unwrap().kind, TableKind::TopK(3));
    }
}
