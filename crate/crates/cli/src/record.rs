//! Output records for `estimate`: JSON lines (canonical) or flattened CSV.

use std::collections::BTreeMap;
use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use serde::Serialize;
use wishart_tail::estimators::{run, EstimateSummary, Method, RateSource, RunSpec};
use wishart_tail::mplaw::log_alpha_approx;
use wishart_tail::tracywidom::{tw_corrected_tail, tw_tail};
use wishart_tail::ModelConfig;

use crate::{DEFAULT_DMC_ITERATIONS, DEFAULT_IS_ITERATIONS};

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum EstimateMethod {
    Is,
    DmcDense,
    DmcTridiag,
    Tw,
    Ctw,
    All,
}

impl EstimateMethod {
    pub fn expand(self) -> &'static [EstimateMethod] {
        use EstimateMethod::*;
        match self {
            Is => &[Is],
            DmcDense => &[DmcDense],
            DmcTridiag => &[DmcTridiag],
            Tw => &[Tw],
            Ctw => &[Ctw],
            All => &[Is, DmcDense, DmcTridiag, Tw, Ctw],
        }
    }

    fn name(self) -> &'static str {
        match self {
            EstimateMethod::Is => "is",
            EstimateMethod::DmcDense => "dmc-dense",
            EstimateMethod::DmcTridiag => "dmc-tridiag",
            EstimateMethod::Tw => "tw",
            EstimateMethod::Ctw => "ctw",
            EstimateMethod::All => "all",
        }
    }

    fn sampler(self) -> Option<Method> {
        match self {
            EstimateMethod::Is => Some(Method::Is),
            EstimateMethod::DmcDense => Some(Method::DmcDense),
            EstimateMethod::DmcTridiag => Some(Method::DmcTridiag),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct SpecEcho {
    pub n: usize,
    pub p: usize,
    pub beta: u8,
    pub x: f64,
    pub k: usize,
    pub method: &'static str,
    #[serde(rename = "N")]
    pub iterations: Option<u64>,
    pub seed: Option<u64>,
}

/// One (x, method) result. Undefined numbers are `None` and carry an entry
/// in `notes` keyed by the field name.
#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct OutputRecord {
    pub spec: SpecEcho,
    pub estimate: Option<f64>,
    pub sd: Option<f64>,
    pub se: Option<f64>,
    pub rel_sd: Option<f64>,
    pub per_iter_seconds: Option<f64>,
    pub r_used: Option<f64>,
    pub r_source: Option<&'static str>,
    pub log_alpha_ld: Option<f64>,
    pub tw: Option<f64>,
    pub ctw: Option<f64>,
    pub notes: BTreeMap<&'static str, String>,
}

pub const CSV_HEADER: [&str; 19] = [
    "n",
    "p",
    "beta",
    "x",
    "k",
    "method",
    "N",
    "seed",
    "estimate",
    "sd",
    "se",
    "rel_sd",
    "per_iter_seconds",
    "r_used",
    "r_source",
    "log_alpha_ld",
    "tw",
    "ctw",
    "notes",
];

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl OutputRecord {
    fn csv_row(&self) -> Vec<String> {
        let s = &self.spec;
        let notes: Vec<String> = self.notes.iter().map(|(k, v)| format!("{k}: {v}")).collect();
        vec![
            s.n.to_string(),
            s.p.to_string(),
            s.beta.to_string(),
            s.x.to_string(),
            s.k.to_string(),
            s.method.to_string(),
            s.iterations.map(|v| v.to_string()).unwrap_or_default(),
            s.seed.map(|v| v.to_string()).unwrap_or_default(),
            cell(self.estimate),
            cell(self.sd),
            cell(self.se),
            cell(self.rel_sd),
            cell(self.per_iter_seconds),
            cell(self.r_used),
            self.r_source.unwrap_or_default().to_string(),
            cell(self.log_alpha_ld),
            cell(self.tw),
            cell(self.ctw),
            notes.join("; "),
        ]
    }
}

pub fn write_records<W: Write>(out: &mut W, records: &[OutputRecord], format: Format) -> Result<()> {
    match format {
        Format::Json => {
            for r in records {
                serde_json::to_writer(&mut *out, r)?;
                writeln!(out)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER)?;
            for r in records {
                w.write_record(r.csv_row())?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub struct EstimateRequest {
    pub config: ModelConfig,
    pub k: usize,
    pub iterations: Option<u64>,
    pub seed: u64,
    pub workers: usize,
    pub rate: Option<f64>,
    pub timing: bool,
}

impl EstimateRequest {
    pub fn record(&self, x: f64, method: EstimateMethod) -> Result<OutputRecord> {
        let c = self.config;
        let mut notes = BTreeMap::new();
        let sampler = method.sampler();
        let iterations = sampler.map(|m| {
            self.iterations.unwrap_or(if m == Method::Is { DEFAULT_IS_ITERATIONS } else { DEFAULT_DMC_ITERATIONS })
        });

        let (tw, ctw) = if self.k == 1 {
            (Some(tw_tail(&c, x)), Some(tw_corrected_tail(&c, x)))
        } else {
            notes.insert("tw", "Tracy-Widom baselines cover k = 1 only".to_string());
            notes.insert("ctw", "Tracy-Widom baselines cover k = 1 only".to_string());
            (None, None)
        };
        let log_alpha_ld = if self.k != 1 {
            notes.insert("log_alpha_ld", "large-deviation approximation covers k = 1 only".to_string());
            None
        } else {
            match log_alpha_approx(&c, x) {
                Ok(v) => finite(v),
                Err(e) => {
                    notes.insert("log_alpha_ld", e.to_string());
                    None
                }
            }
        };

        let mut rec = OutputRecord {
            spec: SpecEcho {
                n: c.n,
                p: c.p,
                beta: c.beta.as_u8(),
                x,
                k: self.k,
                method: method.name(),
                iterations,
                seed: sampler.map(|_| self.seed),
            },
            estimate: None,
            sd: None,
            se: None,
            rel_sd: None,
            per_iter_seconds: None,
            r_used: None,
            r_source: None,
            log_alpha_ld,
            tw,
            ctw,
            notes,
        };

        match sampler {
            Some(m) => {
                let spec = RunSpec::new(c, x, m, iterations.unwrap_or_default(), self.seed)
                    .with_k(self.k)
                    .with_workers(self.workers)
                    .with_rate(if m == Method::Is { self.rate } else { None });
                let summary = run(&spec)?;
                rec.fill_from(&summary, self.timing);
            }
            None => {
                if self.k != 1 {
                    return Err(wishart_tail::Error::InvalidParameter(format!(
                        "method {} is only defined for k = 1",
                        method.name()
                    ))
                    .into());
                }
                rec.estimate = if method == EstimateMethod::Tw { tw } else { ctw };
                for f in ["sd", "se", "rel_sd", "per_iter_seconds"] {
                    rec.notes.insert(f, "deterministic approximation".to_string());
                }
                rec.notes.insert("r_used", "no proposal for a deterministic approximation".to_string());
            }
        }
        Ok(rec)
    }
}

impl OutputRecord {
    fn fill_from(&mut self, s: &EstimateSummary, timing: bool) {
        self.estimate = finite(s.estimate);
        self.sd = finite(s.sd);
        self.se = finite(s.se);
        self.rel_sd = s.rel_sd.and_then(finite);
        if self.rel_sd.is_none() {
            self.notes.insert("rel_sd", "undefined: zero estimate (no hits)".to_string());
        }
        if timing {
            self.per_iter_seconds = finite(s.per_iter_seconds);
        } else {
            self.notes.insert("per_iter_seconds", "not recorded; pass --timing".to_string());
        }
        match s.rate {
            Some(choice) => {
                self.r_used = Some(choice.r);
                self.r_source = Some(match choice.source {
                    RateSource::Computed => "computed",
                    RateSource::Override => "override",
                    RateSource::TopkDefault => "topk-default",
                });
            }
            None => {
                self.notes.insert("r_used", "direct Monte Carlo uses no proposal".to_string());
            }
        }
    }
}
