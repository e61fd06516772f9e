//! Importance-sampling and direct Monte Carlo runs with deterministic
//! parallel aggregation.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::ensemble::{
    build_full_laguerre_bidiagonal, build_laguerre_bidiagonal, minor_spectrum, ratio_statistic,
    sample_wishart_dense, ModelConfig, Spectrum,
};
use crate::error::{invalid, Error, Result};
use crate::mplaw::MpLaw;
use crate::rng::StreamFactory;
use crate::stats::LogWelford;
use crate::weights::{log_dp_dq, sample_lambda1, threshold_xtilde, LogConstants, Proposal};

/// Rate used for the top-k proposal when none is supplied.
pub const TOPK_DEFAULT_RATE: f64 = 0.1;

/// Iterations per scheduling unit. Chunk boundaries depend only on the
/// iteration count, never on the worker count.
const CHUNK: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Is,
    DmcDense,
    DmcTridiag,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Is => "is",
            Method::DmcDense => "dmc-dense",
            Method::DmcTridiag => "dmc-tridiag",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "is" => Ok(Method::Is),
            "dmc-dense" | "dmc" => Ok(Method::DmcDense),
            "dmc-tridiag" => Ok(Method::DmcTridiag),
            other => Err(invalid(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub config: ModelConfig,
    pub x: f64,
    pub k: usize,
    pub iterations: u64,
    pub seed: u64,
    pub workers: usize,
    pub method: Method,
    /// Only consulted by [`Method::Is`].
    pub rate_override: Option<f64>,
}

impl RunSpec {
    pub fn new(config: ModelConfig, x: f64, method: Method, iterations: u64, seed: u64) -> Self {
        Self { config, x, k: 1, iterations, seed, workers: 1, method, rate_override: None }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_rate(mut self, rate: Option<f64>) -> Self {
        self.rate_override = rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.config.p_eff;
        if self.iterations == 0 {
            return Err(invalid("iterations must be at least 1"));
        }
        if self.workers == 0 {
            return Err(invalid("workers must be at least 1"));
        }
        if self.k == 0 || self.k > m {
            return Err(invalid(format!("k = {} must lie in 1..={m}", self.k)));
        }
        if !self.x.is_finite() {
            return Err(invalid(format!("threshold must be finite, got {}", self.x)));
        }
        if self.method == Method::Is {
            if self.k == m {
                return Err(invalid("k = min(n, p) makes the statistic identically min(n, p)"));
            }
            if !(self.x > 1.0 && self.x < m as f64) {
                return Err(Error::Domain(format!(
                    "importance sampling needs 1 < x < {m}, got {}",
                    self.x
                )));
            }
            if let Some(r) = self.rate_override {
                if !(r > 0.0 && r.is_finite()) {
                    return Err(invalid(format!("rate must be positive and finite, got {r}")));
                }
            }
        }
        Ok(())
    }
}

/// Where the proposal rate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateSource {
    /// Marchenko–Pastur tilting rate.
    Computed,
    Override,
    /// Constant default for the top-k statistic.
    TopkDefault,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateChoice {
    pub r: f64,
    pub source: RateSource,
}

/// Rate for an importance-sampling run.
///
/// For `k = 1` without an override the threshold must lie above the edge
/// `(1 + √γ)²`; below it the event is not rare and an explicit rate is
/// required.
pub fn resolve_rate(spec: &RunSpec) -> Result<RateChoice> {
    let edge = spec.config.spectral_edge();
    match (spec.k, spec.rate_override) {
        (_, Some(r)) => {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid(format!("rate must be positive and finite, got {r}")));
            }
            if spec.k == 1 && spec.x <= edge {
                log::warn!(
                    "x = {} is not above the spectral edge {edge:.6}; the event is not rare, \
                     proceeding with the supplied rate {r}",
                    spec.x
                );
            }
            if r >= 0.5 {
                log::warn!("rate {r} >= 1/2: the proposal is lighter-tailed than the target");
            }
            Ok(RateChoice { r, source: RateSource::Override })
        }
        (1, None) => {
            let r = MpLaw::from_config(&spec.config).rate(spec.x)?;
            Ok(RateChoice { r, source: RateSource::Computed })
        }
        (_, None) => Ok(RateChoice { r: TOPK_DEFAULT_RATE, source: RateSource::TopkDefault }),
    }
}

/// One importance-sampling iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationDraw {
    pub lambda1: f64,
    pub minor_sum: f64,
    /// The statistic evaluated on `(λ₁, minor)`.
    pub statistic: f64,
    pub log_weight: f64,
    /// `exp(log_weight)` if the indicator holds, else zero.
    pub value: f64,
    pub indicator: bool,
}

/// One sampler pass: minor spectrum, shifted-exponential λ₁,
/// indicator and log weight.
pub fn is_iteration<R: Rng + ?Sized>(
    spec: &RunSpec,
    consts: &LogConstants,
    r: f64,
    rng: &mut R,
) -> Result<IterationDraw> {
    let config = &spec.config;
    let p = config.p_eff;
    let model = build_laguerre_bidiagonal(config, rng)?;
    let minor = minor_spectrum(&model, config)?;
    let xtilde = threshold_xtilde(spec.x, &minor, p, spec.k)?;
    let lambda2 = minor.largest().unwrap_or(0.0);
    let proposal = Proposal::new(config.n_eff, r, xtilde, lambda2)?;
    let lambda1 = sample_lambda1(&proposal, rng);

    let minor_sum = minor.sum();
    let head: f64 = minor.values()[..spec.k - 1].iter().sum();
    let statistic = p as f64 * (lambda1 + head) / (lambda1 + minor_sum);
    let indicator = statistic > spec.x;
    if spec.k == 1 {
        debug_assert!(
            indicator || statistic >= spec.x * (1.0 - 1e-12),
            "k = 1 proposal produced U = {statistic} <= x = {}",
            spec.x
        );
    }
    debug_assert!({
        let scaled: Vec<f64> = std::iter::once(lambda1)
            .chain(minor.values().iter().copied())
            .map(|v| 4.0 * v)
            .collect();
        let u = ratio_statistic(&Spectrum::new(scaled).expect("ordered"), spec.k, p).expect("nonzero");
        (u > spec.x) == indicator
    });

    let log_weight = log_dp_dq(config, consts, lambda1, &minor, &proposal)?;
    // k = 1 accepts every draw by construction; rounding right at x̃ is
    // the only way the explicit check can disagree.
    let accept = indicator || (spec.k == 1 && lambda1 > xtilde);
    let value = if accept { log_weight.exp() } else { 0.0 };
    Ok(IterationDraw { lambda1, minor_sum, statistic, log_weight, value, indicator: accept })
}

/// Whether one direct Monte Carlo draw exceeds the threshold.
pub fn dmc_iteration<R: Rng + ?Sized>(spec: &RunSpec, rng: &mut R) -> Result<bool> {
    let config = &spec.config;
    let spectrum = match spec.method {
        Method::DmcDense => sample_wishart_dense(config, rng)?,
        Method::DmcTridiag => build_full_laguerre_bidiagonal(config, rng)?.spectrum(config.n_eff as f64)?,
        Method::Is => return Err(invalid("dmc_iteration called with the importance-sampling method")),
    };
    Ok(ratio_statistic(&spectrum, spec.k, config.p_eff)? > spec.x)
}

/// Identity of the quantities a partial aggregates; partials merge only
/// when these agree.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PartialKey {
    n: usize,
    p: usize,
    beta: u8,
    x_bits: u64,
    k: usize,
    method: Method,
    seed: u64,
}

impl PartialKey {
    fn of(spec: &RunSpec) -> Self {
        Self {
            n: spec.config.n,
            p: spec.config.p,
            beta: spec.config.beta.as_u8(),
            x_bits: spec.x.to_bits(),
            k: spec.k,
            method: spec.method,
            seed: spec.seed,
        }
    }
}

/// Streaming moments over a range of iterations of one spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Partial {
    key: Option<PartialKey>,
    moments: LogWelford,
}

impl Partial {
    pub fn empty() -> Self {
        Self { key: None, moments: LogWelford::new() }
    }

    pub fn for_spec(spec: &RunSpec) -> Self {
        Self { key: Some(PartialKey::of(spec)), moments: LogWelford::new() }
    }

    pub fn push_log(&mut self, log_value: f64) {
        self.moments.push_log(log_value);
    }

    pub fn push(&mut self, value: f64) {
        self.moments.push(value);
    }

    pub fn count(&self) -> u64 {
        self.moments.count()
    }

    pub fn mean(&self) -> f64 {
        self.moments.mean()
    }

    /// Sum of squared deviations from the mean.
    pub fn m2(&self) -> f64 {
        match self.moments.count() {
            0 | 1 => 0.0,
            c => self.moments.variance() * (c - 1) as f64,
        }
    }

    pub fn moments(&self) -> &LogWelford {
        &self.moments
    }
}

/// Combine partials from disjoint iteration ranges of the same spec.
pub fn merge(a: &Partial, b: &Partial) -> Result<Partial> {
    let key = match (a.key, b.key) {
        (Some(ka), Some(kb)) if ka != kb => {
            return Err(invalid("cannot merge partials from different run specifications"));
        }
        (ka, kb) => ka.or(kb),
    };
    let mut moments = a.moments;
    moments.merge(&b.moments);
    Ok(Partial { key, moments })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSummary {
    pub estimate: f64,
    /// Natural log of the estimate; finite even when `estimate` underflows.
    pub log_estimate: f64,
    pub sd: f64,
    pub se: f64,
    /// `sd / estimate`; `None` when the estimate is zero.
    pub rel_sd: Option<f64>,
    pub count: u64,
    pub wall_seconds: f64,
    pub per_iter_seconds: f64,
    /// Proposal rate for importance sampling.
    pub rate: Option<RateChoice>,
}

impl EstimateSummary {
    pub fn from_partial(partial: &Partial, wall_seconds: f64, rate: Option<RateChoice>) -> Self {
        let m = partial.moments();
        let count = m.count();
        let log_estimate = m.log_mean();
        let estimate = if count == 0 { f64::NAN } else { log_estimate.exp() };
        let sd = if count < 2 { f64::NAN } else { m.sd() };
        Self {
            estimate,
            log_estimate,
            sd,
            se: sd / (count as f64).sqrt(),
            rel_sd: m.rel_sd(),
            count,
            wall_seconds,
            per_iter_seconds: wall_seconds / count as f64,
            rate,
        }
    }
}

fn run_chunk(
    spec: &RunSpec,
    streams: &StreamFactory,
    consts: Option<&LogConstants>,
    r: f64,
    chunk: u64,
) -> Result<Partial> {
    let start = chunk * CHUNK;
    let end = (start + CHUNK).min(spec.iterations);
    let mut partial = Partial::for_spec(spec);
    for index in start..end {
        let mut rng = streams.stream(index);
        let annotate = |e: Error| match e {
            Error::Numerical { routine, detail } => {
                Error::Numerical { routine, detail: format!("iteration {index}: {detail}") }
            }
            other => other,
        };
        match consts {
            Some(consts) => {
                let draw = is_iteration(spec, consts, r, &mut rng).map_err(annotate)?;
                partial.push_log(if draw.indicator { draw.log_weight } else { f64::NEG_INFINITY });
            }
            None => {
                let hit = dmc_iteration(spec, &mut rng).map_err(annotate)?;
                partial.push(if hit { 1.0 } else { 0.0 });
            }
        }
    }
    Ok(partial)
}

/// Execute `spec.iterations` iterations on `spec.workers` threads.
///
/// Iteration `i` always uses stream `i` of the seed and partials are merged
/// in chunk order, so the result does not depend on the worker count.
pub fn run(spec: &RunSpec) -> Result<EstimateSummary> {
    spec.validate()?;
    let (consts, rate) = match spec.method {
        Method::Is => (Some(LogConstants::new(&spec.config)?), Some(resolve_rate(spec)?)),
        _ => (None, None),
    };
    let r = rate.map_or(0.0, |c| c.r);
    let streams = StreamFactory::new(spec.seed);
    let chunks = spec.iterations.div_ceil(CHUNK);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| invalid(format!("cannot start {} workers: {e}", spec.workers)))?;

    let started = Instant::now();
    let partials: Vec<Partial> = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| run_chunk(spec, &streams, consts.as_ref(), r, c))
            .collect::<Result<Vec<_>>>()
    })?;
    let wall = started.elapsed().as_secs_f64();

    let mut total = Partial::for_spec(spec);
    for p in &partials {
        total = merge(&total, p)?;
    }
    Ok(EstimateSummary::from_partial(&total, wall, rate))
}

/// `(rel_sd_dmc / rel_sd_is)²`: how many more direct Monte Carlo
/// iterations reach the same relative error.
pub fn efficiency_ratio(is_summary: &EstimateSummary, dmc_summary: &EstimateSummary) -> Result<f64> {
    let is = is_summary
        .rel_sd
        .filter(|v| *v > 0.0)
        .ok_or_else(|| Error::UndefinedRatio("importance-sampling estimate is zero or constant".into()))?;
    let dmc = dmc_summary
        .rel_sd
        .ok_or_else(|| Error::UndefinedRatio("direct Monte Carlo estimate is zero".into()))?;
    Ok((dmc / is).powi(2))
}

/// Iterations needed so that `Pr(|relative error| > eps) < delta` under the
/// normal approximation, given a per-iteration relative SD.
pub fn iterations_for_accuracy(rel_sd: f64, eps: f64, delta: f64) -> Result<u64> {
    if !(rel_sd >= 0.0 && rel_sd.is_finite()) {
        return Err(invalid(format!("relative SD must be finite and nonnegative, got {rel_sd}")));
    }
    if !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("need eps > 0 and 0 < delta < 1, got {eps}, {delta}")));
    }
    let z = Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(1.0 - delta / 2.0);
    Ok(((z * rel_sd / eps).powi(2).ceil() as u64).max(1))
}
