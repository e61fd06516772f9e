//! Marchenko–Pastur law with the β-scaling used for the eigenvalue model,
//! the tilting rate for the importance-sampling proposal and the
//! large-deviation rate function of the largest eigenvalue.
//!
//! The law σ_β is the unit-variance Marchenko–Pastur law pushed forward by
//! the factor β: support `[β(1 − √γ)², β(1 + √γ)²]` and first moment β.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::ensemble::{Beta, ModelConfig};
use crate::error::{invalid, Error, Result};
use crate::quad::{self, Tolerance};

const QUAD_TOL: Tolerance = Tolerance::new(1e-14, 1e-13);

/// How the Stieltjes-type integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StieltjesEval {
    #[default]
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpLaw {
    pub gamma: f64,
    pub beta: Beta,
    pub lower: f64,
    pub upper: f64,
}

impl MpLaw {
    pub fn new(gamma: f64, beta: Beta) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(invalid(format!("aspect ratio must lie in (0, 1], got {gamma}")));
        }
        let b = beta.value();
        let rg = gamma.sqrt();
        let lower = if gamma == 1.0 { 0.0 } else { b * (1.0 - rg).powi(2) };
        Ok(Self { gamma, beta, lower, upper: b * (1.0 + rg).powi(2) })
    }

    pub fn from_config(config: &ModelConfig) -> Self {
        Self::new(config.gamma, config.beta).expect("ModelConfig guarantees gamma in (0, 1]")
    }

    /// Density of σ_β at `s`; zero off the support.
    pub fn density(&self, s: f64) -> f64 {
        if s <= self.lower || s >= self.upper || s <= 0.0 {
            return 0.0;
        }
        ((s - self.lower) * (self.upper - s)).sqrt() / (self.beta.value() * 2.0 * PI * self.gamma * s)
    }

    /// `∫ g dσ_β` by adaptive quadrature after `s = lower + width·sin²θ`,
    /// which removes the square-root behaviour at both edges.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64> {
        let width = self.upper - self.lower;
        let norm = self.beta.value() * 2.0 * PI * self.gamma;
        quad::integrate(
            |theta: f64| {
                let (sn, cs) = theta.sin_cos();
                let s = self.lower + width * sn * sn;
                if s <= 0.0 {
                    return 0.0;
                }
                g(s) * 2.0 * width * width * sn * sn * cs * cs / (norm * s)
            },
            0.0,
            FRAC_PI_2,
            QUAD_TOL,
        )
    }

    /// `∫ (z − y)⁻¹ σ_β(dy)` for `z` above the support, in closed form.
    pub fn stieltjes(&self, z: f64) -> Result<f64> {
        self.stieltjes_with(z, StieltjesEval::ClosedForm)
    }

    pub fn stieltjes_with(&self, z: f64, eval: StieltjesEval) -> Result<f64> {
        if !(z > self.upper) {
            return Err(Error::Domain(format!(
                "Stieltjes integral needs z above the support edge {}, got {z}",
                self.upper
            )));
        }
        match eval {
            StieltjesEval::ClosedForm => Ok(self.stieltjes_closed(z)),
            StieltjesEval::Quadrature => self.integrate(|y| 1.0 / (z - y)),
        }
    }

    // Valid for z >= upper, edge included.
    fn stieltjes_closed(&self, z: f64) -> f64 {
        // σ_β is the unit-variance law scaled by β; with w = z/β,
        // G(w) = (w − 1 + γ − √((w − a)(w − b))) / (2γw), rationalised.
        let b = self.beta.value();
        let w = z / b;
        let rg = self.gamma.sqrt();
        let (lo, hi) = ((1.0 - rg).powi(2), (1.0 + rg).powi(2));
        let root = ((w - lo) * (w - hi)).max(0.0).sqrt();
        2.0 / (w - 1.0 + self.gamma + root) / b
    }

    /// Exponential tilting rate `r(x)` for a threshold strictly above the
    /// edge `(1 + √γ)²`.
    pub fn rate(&self, x: f64) -> Result<f64> {
        self.rate_with(x, StieltjesEval::ClosedForm)
    }

    pub fn rate_with(&self, x: f64, eval: StieltjesEval) -> Result<f64> {
        let edge = (1.0 + self.gamma.sqrt()).powi(2);
        if !(x > edge) {
            return Err(Error::NonRareRegime { x, edge });
        }
        let b = self.beta.value();
        let s = self.stieltjes_with(b * x, eval)?;
        Ok(self.rate_from_stieltjes(x, s))
    }

    /// Limit of the rate as the threshold decreases to the edge (zero for
    /// every γ).
    pub fn edge_rate_limit(&self) -> f64 {
        let edge = (1.0 + self.gamma.sqrt()).powi(2);
        self.rate_from_stieltjes(edge, self.stieltjes_closed(self.beta.value() * edge))
    }

    fn rate_from_stieltjes(&self, x: f64, s: f64) -> f64 {
        0.5 - self.beta.value() * self.gamma * s - (1.0 - self.gamma) / (2.0 * x)
    }

    /// `∫ ln(s − t) σ_β(dt)` for `s` at or above the upper edge.
    pub fn log_potential(&self, s: f64) -> Result<f64> {
        if s < self.upper {
            return Err(Error::Domain(format!("log potential needs s >= {}, got {s}", self.upper)));
        }
        self.integrate(|t| (s - t).ln())
    }

    /// Large-deviation rate function of the largest eigenvalue; `+∞` below
    /// the upper edge and zero at it.
    pub fn ld_rate(&self, s: f64) -> Result<f64> {
        if s < self.upper {
            return Ok(f64::INFINITY);
        }
        let b = self.beta.value();
        let g = self.gamma;
        let constant = 0.5 * b * (g.ln() + (1.0 / g + 1.0) * (b.ln() - 1.0));
        Ok(-b * self.log_potential(s)? + s / (2.0 * g) - 0.5 * b * (1.0 / g - 1.0) * s.ln() + constant)
    }
}

/// Large-deviation approximation `−n γ I_β(βx)` to `ln Pr(U > x)`.
pub fn log_alpha_approx(config: &ModelConfig, x: f64) -> Result<f64> {
    let edge = config.spectral_edge();
    if !(x > edge) {
        return Err(Error::NonRareRegime { x, edge });
    }
    let law = MpLaw::from_config(config);
    Ok(-(config.n_eff as f64) * config.gamma * law.ld_rate(config.beta.value() * x)?)
}
