//! Exact tail probabilities for two and three eigenvalues by nested
//! adaptive quadrature of the joint eigenvalue density over `{U > x}`.
//!
//! Used to check the Monte Carlo estimators at small scale.

use crate::ensemble::ModelConfig;
use crate::error::{invalid, Error, Result};
use crate::quad::{self, Tolerance};
use crate::weights::log_norm_const;

/// Upper cutoff of each eigenvalue, `CUTOFF_SCALE / n`: the density there
/// is below `e^{−CUTOFF_SCALE/2}` times a polynomial.
const CUTOFF_SCALE: f64 = 800.0;

/// Log of the ordered joint eigenvalue density at `lambda` (descending).
pub fn log_joint_density(config: &ModelConfig, log_c: f64, lambda: &[f64]) -> f64 {
    let b = config.beta.value();
    let (n, p) = (config.n_eff as f64, config.p_eff as f64);
    let power = b * (n - p + 1.0) / 2.0 - 1.0;
    let mut acc = log_c;
    for (i, &li) in lambda.iter().enumerate() {
        acc += power * li.ln() - n * li / 2.0;
        for &lj in &lambda[i + 1..] {
            acc += b * (li - lj).abs().ln();
        }
    }
    acc
}

/// Integral over `[a, b]` split at fixed multiples of the bulk scale so the
/// adaptive rule sees the peak.
fn integrate_split<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if !(b > a) {
        return Ok(0.0);
    }
    let mut cuts = vec![a];
    cuts.extend([0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0].iter().filter(|&&c| c > a && c < b));
    cuts.push(b);
    cuts.windows(2).map(|w| quad::integrate(&f, w[0], w[1], tol)).sum()
}

/// `Pr(U_{n,p} > x)` for `p_eff ∈ {2, 3}` and `k = 1`.
pub fn tail_probability(config: &ModelConfig, x: f64) -> Result<f64> {
    let p = config.p_eff;
    if !(p == 2 || p == 3) {
        return Err(invalid(format!("quadrature oracle supports min(n, p) in {{2, 3}}, got {p}")));
    }
    let pf = p as f64;
    if !(x > 1.0 && x < pf) {
        return Err(Error::Domain(format!("threshold must lie in (1, {p}), got {x}")));
    }
    let log_c = log_norm_const(config.n_eff, p, config.beta)?;
    let top = CUTOFF_SCALE / config.n_eff as f64;
    // λ₁ > c (λ₂ + … + λ_p)
    let c = x / (pf - x);
    let tol = Tolerance::new(1e-300, 1e-11);
    let density = |l: &[f64]| log_joint_density(config, log_c, l).exp();

    let value = if p == 2 {
        integrate_split(
            |l2| {
                let lo = (c * l2).max(l2);
                integrate_split(|l1| density(&[l1, l2]), lo, top, tol).unwrap_or(f64::NAN)
            },
            0.0,
            top,
            tol,
        )?
    } else {
        integrate_split(
            |l3| {
                integrate_split(
                    |l2| {
                        let lo = (c * (l2 + l3)).max(l2);
                        integrate_split(|l1| density(&[l1, l2, l3]), lo, top, tol).unwrap_or(f64::NAN)
                    },
                    l3,
                    top,
                    tol,
                )
                .unwrap_or(f64::NAN)
            },
            0.0,
            top,
            tol,
        )?
    };
    if !value.is_finite() {
        return Err(Error::Numerical { routine: "quadrature_oracle", detail: format!("non-finite result {value}") });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Beta;

    #[test]
    fn total_mass_is_one() {
        // x → 1 covers the whole ordered region
        for (n, p) in [(6, 2), (10, 2), (6, 3)] {
            let c = ModelConfig::new(n, p, Beta::Real).unwrap();
            let a = tail_probability(&c, 1.0 + 1e-12).unwrap();
            assert!((a - 1.0).abs() < 1e-8, "n={n} p={p}: {a}");
        }
    }

    #[test]
    fn complex_two_by_two_closed_form() {
        // β = 2, p = 2: U = 2λ₁/(λ₁+λ₂); with y = λ₁/(λ₁+λ₂) the law of y on
        // (1/2, 1) is ∝ (2y − 1)² (y(1 − y))^{n−2}
        let n = 5;
        let c = ModelConfig::new(n, 2, Beta::Complex).unwrap();
        let x = 1.6;
        let g = |y: f64| (2.0 * y - 1.0).powi(2) * (y * (1.0 - y)).powi(n as i32 - 2);
        let tol = Tolerance::default();
        let want = quad::integrate(g, x / 2.0, 1.0, tol).unwrap() / quad::integrate(g, 0.5, 1.0, tol).unwrap();
        let got = tail_probability(&c, x).unwrap();
        assert!((got / want - 1.0).abs() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn rejects_unsupported_inputs() {
        let c = ModelConfig::new(10, 4, Beta::Real).unwrap();
        assert!(tail_probability(&c, 2.0).is_err());
        let c = ModelConfig::new(10, 2, Beta::Real).unwrap();
        assert!(matches!(tail_probability(&c, 2.0), Err(Error::Domain(_))));
    }
}
