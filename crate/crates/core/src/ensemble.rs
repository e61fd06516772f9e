//! Wishart / β-Laguerre spectra and the top-k ratio statistic.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::linalg;

/// Ensemble index: real (β = 1) or complex (β = 2) Gaussian entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Beta {
    Real,
    Complex,
}

impl Beta {
    pub fn value(self) -> f64 {
        match self {
            Beta::Real => 1.0,
            Beta::Complex => 2.0,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Beta::Real => 1,
            Beta::Complex => 2,
        }
    }
}

impl TryFrom<u8> for Beta {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Beta::Real),
            2 => Ok(Beta::Complex),
            other => Err(invalid(format!("beta must be 1 or 2, got {other}"))),
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Problem instance `(n, p, β)`.
///
/// `n_eff >= p_eff` always holds: when `p > n` the labels are swapped, which
/// leaves the ratio statistic unchanged because `XᴴX` and `XXᴴ` share their
/// nonzero spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub n: usize,
    pub p: usize,
    pub beta: Beta,
    pub n_eff: usize,
    pub p_eff: usize,
    pub gamma: f64,
}

impl ModelConfig {
    pub fn new(n: usize, p: usize, beta: Beta) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(invalid(format!("n and p must be positive (n = {n}, p = {p})")));
        }
        let (n_eff, p_eff) = if p <= n { (n, p) } else { (p, n) };
        if p_eff < 2 {
            return Err(invalid(format!(
                "min(n, p) = {p_eff}: the ratio statistic is identically 1, no tail to estimate"
            )));
        }
        Ok(Self { n, p, beta, n_eff, p_eff, gamma: p_eff as f64 / n_eff as f64 })
    }

    /// `min(n, p)`, the multiplier in the ratio statistic.
    pub fn m(&self) -> usize {
        self.p_eff
    }

    /// Upper edge `(1 + √γ)²` of the unit-variance Marchenko–Pastur law.
    pub fn spectral_edge(&self) -> f64 {
        (1.0 + self.gamma.sqrt()).powi(2)
    }
}

/// Eigenvalues sorted in descending order, all nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("spectrum entries must be finite and nonnegative"));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid("spectrum must be sorted in descending order"));
        }
        Ok(Self(values))
    }

    /// Sorts descending and clamps round-off negatives (relative to the
    /// largest magnitude) to zero.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for v in values.iter_mut() {
            if *v < 0.0 && *v >= -1e-10 * scale {
                *v = 0.0;
            }
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn largest(&self) -> Option<f64> {
        self.0.first().copied()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Square root of a chi-square(`df`) draw, via Gamma(df/2, scale 2).
pub fn sample_chi<R: Rng + ?Sized>(df: f64, rng: &mut R) -> Result<f64> {
    if !(df > 0.0 && df.is_finite()) {
        return Err(invalid(format!("chi degrees of freedom must be positive, got {df}")));
    }
    let gamma = Gamma::new(0.5 * df, 2.0).map_err(|e| invalid(e.to_string()))?;
    Ok(gamma.sample(rng).sqrt())
}

/// Degrees of freedom of a lower-bidiagonal Laguerre model with `rows`
/// rows and leading diagonal degree `lead`: diagonal `β(lead − i)`,
/// subdiagonal `β(rows − 1 − j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreDegrees {
    pub diag: Vec<f64>,
    pub subdiag: Vec<f64>,
}

impl LaguerreDegrees {
    fn new(lead: usize, rows: usize, beta: Beta) -> Self {
        let b = beta.value();
        Self {
            diag: (0..rows).map(|i| b * (lead - i) as f64).collect(),
            subdiag: (0..rows.saturating_sub(1)).map(|j| b * (rows - 1 - j) as f64).collect(),
        }
    }

    /// The `(p_eff − 1)`-dimensional model whose spectrum, divided by
    /// `n_eff`, gives λ₂ ≥ … ≥ λ_p.
    pub fn minor(config: &ModelConfig) -> Self {
        Self::new(config.n_eff - 1, config.p_eff - 1, config.beta)
    }

    /// The full `p_eff`-dimensional model, distributed as the whole spectrum.
    pub fn full(config: &ModelConfig) -> Self {
        Self::new(config.n_eff, config.p_eff, config.beta)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BidiagonalModel> {
        let draw = |df: f64, rng: &mut R| -> Result<f64> {
            let v = sample_chi(df, rng)?;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(Error::Numerical {
                    routine: "sample_chi",
                    detail: format!("nonpositive chi({df}) draw {v}"),
                })
            }
        };
        let diag = self.diag.iter().map(|&df| draw(df, rng)).collect::<Result<Vec<_>>>()?;
        let subdiag = self.subdiag.iter().map(|&df| draw(df, rng)).collect::<Result<Vec<_>>>()?;
        Ok(BidiagonalModel { diag, subdiag })
    }
}

/// Lower-bidiagonal matrix `B` with independent chi entries.
#[derive(Debug, Clone, PartialEq)]
pub struct BidiagonalModel {
    pub diag: Vec<f64>,
    pub subdiag: Vec<f64>,
}

impl BidiagonalModel {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Eigenvalues of `B Bᵀ / scale`, descending.
    pub fn spectrum(&self, scale: f64) -> Result<Spectrum> {
        if self.subdiag.len() + 1 != self.diag.len() {
            return Err(invalid(format!(
                "malformed bidiagonal model: {} diagonal and {} subdiagonal entries",
                self.diag.len(),
                self.subdiag.len()
            )));
        }
        let (t_diag, t_off) = linalg::bidiagonal_gram(&self.diag, &self.subdiag);
        let mut eig = linalg::tridiagonal_eigenvalues(&t_diag, &t_off)?;
        for v in eig.iter_mut() {
            *v /= scale;
        }
        Spectrum::from_unsorted(eig)
    }
}

/// Samples the `(p_eff − 1) × (p_eff − 1)` bidiagonal model for the minor
/// spectrum.
pub fn build_laguerre_bidiagonal<R: Rng + ?Sized>(
    config: &ModelConfig,
    rng: &mut R,
) -> Result<BidiagonalModel> {
    if config.p_eff < 2 {
        return Err(invalid("the minor model needs p_eff >= 2"));
    }
    LaguerreDegrees::minor(config).sample(rng)
}

/// Samples the full `p_eff × p_eff` bidiagonal model.
pub fn build_full_laguerre_bidiagonal<R: Rng + ?Sized>(
    config: &ModelConfig,
    rng: &mut R,
) -> Result<BidiagonalModel> {
    LaguerreDegrees::full(config).sample(rng)
}

/// Eigenvalues of `B Bᵀ / n_eff`, descending.
pub fn minor_spectrum(model: &BidiagonalModel, config: &ModelConfig) -> Result<Spectrum> {
    model.spectrum(config.n_eff as f64)
}

/// Nonzero spectrum of `XᴴX / n` for a dense Gaussian `n × p` matrix `X`.
///
/// Real entries are standard normal; complex entries have independent
/// standard normal real and imaginary parts (variance 2). The smaller Gram
/// matrix is decomposed, so the result has `min(n, p)` entries.
pub fn sample_wishart_dense<R: Rng + ?Sized>(config: &ModelConfig, rng: &mut R) -> Result<Spectrum> {
    let (n, p) = (config.n, config.p);
    let mut eig: Vec<f64> = match config.beta {
        Beta::Real => {
            let x = DMatrix::<f64>::from_fn(n, p, |_, _| rng.sample(StandardNormal));
            let gram = if p <= n { x.tr_mul(&x) } else { &x * x.transpose() };
            gram.symmetric_eigenvalues().iter().copied().collect()
        }
        Beta::Complex => {
            let x = DMatrix::<Complex64>::from_fn(n, p, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let gram = if p <= n { x.ad_mul(&x) } else { &x * x.adjoint() };
            gram.symmetric_eigenvalues().iter().copied().collect()
        }
    };
    let scale = n as f64;
    for v in eig.iter_mut() {
        *v /= scale;
    }
    Spectrum::from_unsorted(eig)
}

/// `m (λ₁ + … + λ_k) / (λ₁ + … + λ_len)`.
pub fn ratio_statistic(spectrum: &Spectrum, k: usize, m: usize) -> Result<f64> {
    if k == 0 || k > spectrum.len() {
        return Err(invalid(format!("k = {k} must lie in 1..={}", spectrum.len())));
    }
    let trace = spectrum.sum();
    if !(trace > 0.0) {
        return Err(invalid("zero trace: ratio statistic undefined"));
    }
    let top: f64 = spectrum.values()[..k].iter().sum();
    Ok(m as f64 * top / trace)
}
