//! Normalizing constants, the λ₁ threshold, the shifted-exponential
//! proposal and the log likelihood ratio `ln dP/dQ` of one draw.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::ensemble::{Beta, ModelConfig, Spectrum};
use crate::error::{invalid, Error, Result};
use crate::special::ln_gamma;

/// `ln C_{n,p,β}`, the log normalizing constant of the ordered eigenvalue
/// density `C ∏|λi − λj|^β ∏ λi^{β(n−p+1)/2 − 1} exp(−n Σλ/2)`.
pub fn log_norm_const(n: usize, p: usize, beta: Beta) -> Result<f64> {
    if p == 0 || p > n {
        return Err(invalid(format!("need 1 <= p <= n, got n = {n}, p = {p}")));
    }
    let b = beta.value();
    let (nf, pf) = (n as f64, p as f64);
    let lg_half = ln_gamma(1.0 + b / 2.0);
    let sum: f64 = (1..=p)
        .map(|j| {
            let jf = j as f64;
            lg_half - ln_gamma(1.0 + b * jf / 2.0) - ln_gamma(b * (nf - pf + jf) / 2.0)
        })
        .sum();
    Ok(ln_gamma(pf + 1.0) + b * nf * pf / 2.0 * (nf / 2.0).ln() + sum)
}

/// Constants shared by every iteration of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogConstants {
    pub log_c_np: f64,
    pub log_c_minor: f64,
    /// `ln[(n/(n−1))^{β(n−1)(p−1)/2} C_{n−1,p−1,β} / C_{n,p,β}]`
    pub log_ratio_k: f64,
}

impl LogConstants {
    pub fn new(config: &ModelConfig) -> Result<Self> {
        let (n, p, beta) = (config.n_eff, config.p_eff, config.beta);
        let log_c_np = log_norm_const(n, p, beta)?;
        let log_c_minor = log_norm_const(n - 1, p - 1, beta)?;
        let (nf, pf) = (n as f64, p as f64);
        let jacobian = beta.value() * (nf - 1.0) * (pf - 1.0) / 2.0 * (nf / (nf - 1.0)).ln();
        Ok(Self { log_c_np, log_c_minor, log_ratio_k: jacobian + log_c_minor - log_c_np })
    }
}

/// Threshold on λ₁ equivalent to `U^k > x` given the minor spectrum
/// λ₂ ≥ … ≥ λ_p: `(x Σλ_{2..p} − p Σλ_{2..k}) / (p − x)`.
///
/// For `k >= 2` the value may be nonpositive, in which case the ordering
/// constraint λ₁ > λ₂ is the binding one.
pub fn threshold_xtilde(x: f64, minor: &Spectrum, p: usize, k: usize) -> Result<f64> {
    let pf = p as f64;
    if !(x > 1.0 && x < pf) {
        return Err(Error::Domain(format!("threshold x = {x} must lie in (1, {p})")));
    }
    if k == 0 || k > p {
        return Err(invalid(format!("k = {k} must lie in 1..={p}")));
    }
    if minor.len() + 1 != p {
        return Err(invalid(format!("minor spectrum has {} entries, expected {}", minor.len(), p - 1)));
    }
    let head: f64 = minor.values()[..k - 1].iter().sum();
    Ok((x * minor.sum() - pf * head) / (pf - x))
}

/// Shifted exponential proposal for λ₁: `lower + Exp(rate)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    /// `n r`
    pub rate: f64,
    /// `max(x̃, λ₂)`
    pub lower: f64,
    pub xtilde: f64,
}

impl Proposal {
    pub fn new(n: usize, r: f64, xtilde: f64, lambda2: f64) -> Result<Self> {
        let rate = n as f64 * r;
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(invalid(format!("proposal rate must be positive, got r = {r}")));
        }
        Ok(Self { rate, lower: xtilde.max(lambda2), xtilde })
    }
}

pub fn sample_lambda1<R: Rng + ?Sized>(proposal: &Proposal, rng: &mut R) -> f64 {
    let exp = Exp::new(proposal.rate).expect("proposal rate validated at construction");
    loop {
        let v = proposal.lower + exp.sample(rng);
        // a zero exponential draw (or absorption into a huge `lower`) would
        // leave λ₁ on the boundary of the support
        if v > proposal.lower {
            return v;
        }
    }
}

/// `ln dP/dQ` at `(λ₁, minor)`:
///
/// ```text
/// −ln K + β Σ ln(λ₁ − λᵢ) + (β(n−p+1)/2 − 1) ln λ₁ − nλ₁/2 − ln(nr) + nr(λ₁ − lower)
/// ```
///
/// with `ln K` = [`LogConstants::log_ratio_k`].
pub fn log_dp_dq(
    config: &ModelConfig,
    consts: &LogConstants,
    lambda1: f64,
    minor: &Spectrum,
    proposal: &Proposal,
) -> Result<f64> {
    let top = minor.largest().unwrap_or(0.0);
    if !(lambda1 > proposal.lower) || !(lambda1 > top) {
        return Err(Error::SupportViolation(format!(
            "lambda1 = {lambda1} must exceed the proposal bound {} and lambda2 = {top}",
            proposal.lower
        )));
    }
    let b = config.beta.value();
    let (nf, pf) = (config.n_eff as f64, config.p_eff as f64);
    let vandermonde: f64 = minor.values().iter().map(|&l| (lambda1 - l).ln()).sum();
    let power = b * (nf - pf + 1.0) / 2.0 - 1.0;
    Ok(-consts.log_ratio_k + b * vandermonde + power * lambda1.ln() - nf * lambda1 / 2.0
        - proposal.rate.ln()
        + proposal.rate * (lambda1 - proposal.lower))
}
