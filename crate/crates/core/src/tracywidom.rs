//! Tracy–Widom distributions for β ∈ {1, 2} from the Hastings–McLeod
//! solution of Painlevé II, edge centering constants and the plain and
//! corrected tail approximations of the ratio statistic.
//!
//! With `q'' = s q + 2 q³`, `q ~ Ai` at +∞,
//!
//! ```text
//! u(s) = ∫_s^∞ q²,   v(s) = ∫_s^∞ (t − s) q²,   w(s) = ∫_s^∞ q
//! F₂ = exp(−v),      F₁ = exp(−(v + w)/2)
//! ```
//!
//! `u`, `v` and `w` ride along with `(q, q')` in one backward RK4 solve.
//! Below [`ASYMPTOTIC_SWITCH`] the Hastings–McLeod solution is unstable
//! under forward integration and `q` is replaced by its asymptotic series
//! `√(−s/2)(1 + s⁻³/8 − 73 s⁻⁶/128 + …)`.

use std::io::{self, Write};
use std::sync::OnceLock;

use crate::ensemble::{Beta, ModelConfig};
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};
use crate::special::airy_ai;

pub const GRID_MIN: f64 = -10.0;
pub const GRID_MAX: f64 = 14.0;
pub const GRID_STEP: f64 = 1.0 / 256.0;
/// Start of the backward solve; `q` is Ai above it.
pub const INITIAL_POINT: f64 = 8.0;
pub const ASYMPTOTIC_SWITCH: f64 = -5.5;
/// RK4 steps per grid cell.
const SUBSTEPS: usize = 4;
/// Step of the central second difference in the correction term.
pub const SECOND_DIFF_STEP: f64 = 1e-3;

/// Tabulated distribution with exact slopes at the nodes.
#[derive(Debug, Clone)]
pub struct TwGrid {
    beta: Beta,
    abscissae: Vec<f64>,
    cdf: Vec<f64>,
    tail: Vec<f64>,
    density: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    q: f64,
    u: f64,
    v: f64,
    w: f64,
}

fn grid_len() -> usize {
    ((GRID_MAX - GRID_MIN) / GRID_STEP).round() as usize + 1
}

fn abscissa(i: usize) -> f64 {
    GRID_MIN + i as f64 * GRID_STEP
}

/// Hastings–McLeod asymptotics as s → −∞.
fn q_asymptotic(s: f64) -> f64 {
    let t = s.powi(-3);
    (-s / 2.0).sqrt()
        * (1.0 + t * (1.0 / 8.0 + t * (-73.0 / 128.0 + t * (10657.0 / 1024.0 - t * 13912277.0 / 32768.0))))
}

fn airy_moments(s: f64) -> Result<(f64, f64, f64)> {
    let tol = Tolerance::new(0.0, 1e-13);
    let hi = s + 30.0;
    let ai = |t: f64| airy_ai(t).0;
    let u = quad::integrate(|t| ai(t).powi(2), s, hi, tol)?;
    let v = quad::integrate(|t| (t - s) * ai(t).powi(2), s, hi, tol)?;
    let w = quad::integrate(ai, s, hi, tol)?;
    Ok((u, v, w))
}

fn rk4<const N: usize>(y: &[f64; N], s: f64, h: f64, f: &impl Fn(f64, &[f64; N]) -> [f64; N]) -> [f64; N] {
    let add = |a: &[f64; N], b: &[f64; N], c: f64| -> [f64; N] { std::array::from_fn(|i| a[i] + c * b[i]) };
    let k1 = f(s, y);
    let k2 = f(s + h / 2.0, &add(y, &k1, h / 2.0));
    let k3 = f(s + h / 2.0, &add(y, &k2, h / 2.0));
    let k4 = f(s + h, &add(y, &k3, h));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn solve_nodes() -> Result<Vec<Node>> {
    let len = grid_len();
    let i0 = ((INITIAL_POINT - GRID_MIN) / GRID_STEP).round() as usize;
    let i_switch = ((ASYMPTOTIC_SWITCH - GRID_MIN) / GRID_STEP).round() as usize;
    let mut nodes = vec![Node { q: 0.0, u: 0.0, v: 0.0, w: 0.0 }; len];

    for (i, node) in nodes.iter_mut().enumerate().skip(i0) {
        let s = abscissa(i);
        let (u, v, w) = airy_moments(s)?;
        *node = Node { q: airy_ai(s).0, u, v, w };
    }

    let (ai, aip) = airy_ai(INITIAL_POINT);
    let start = nodes[i0];
    let mut y = [ai, aip, start.u, start.v, start.w];
    let painleve = |s: f64, y: &[f64; 5]| [y[1], s * y[0] + 2.0 * y[0].powi(3), -y[0] * y[0], -y[2], -y[0]];
    let h = -GRID_STEP / SUBSTEPS as f64;
    for i in (i_switch..i0).rev() {
        let s_hi = abscissa(i + 1);
        for k in 0..SUBSTEPS {
            y = rk4(&y, s_hi + k as f64 * h, h, &painleve);
        }
        nodes[i] = Node { q: y[0], u: y[2], v: y[3], w: y[4] };
    }

    let mut z = [y[2], y[3], y[4]];
    let tail_eqs = |s: f64, z: &[f64; 3]| {
        let q = q_asymptotic(s);
        [-q * q, -z[0], -q]
    };
    for i in (0..i_switch).rev() {
        let s_hi = abscissa(i + 1);
        for k in 0..SUBSTEPS {
            z = rk4(&z, s_hi + k as f64 * h, h, &tail_eqs);
        }
        nodes[i] = Node { q: q_asymptotic(abscissa(i)), u: z[0], v: z[1], w: z[2] };
    }

    if let Some(bad) = nodes.iter().position(|n| !(n.u.is_finite() && n.v.is_finite() && n.w.is_finite())) {
        return Err(Error::Numerical {
            routine: "painleve_ii",
            detail: format!("non-finite state at s = {}", abscissa(bad)),
        });
    }
    Ok(nodes)
}

impl TwGrid {
    pub fn build(beta: Beta) -> Result<Self> {
        let nodes = solve_nodes()?;
        let abscissae: Vec<f64> = (0..nodes.len()).map(abscissa).collect();
        let (mut cdf, mut tail, mut density) = (Vec::new(), Vec::new(), Vec::new());
        for n in &nodes {
            let (exponent, log_slope) = match beta {
                Beta::Complex => (n.v, n.u),
                Beta::Real => ((n.v + n.w) / 2.0, (n.u + n.q) / 2.0),
            };
            let f = (-exponent).exp();
            cdf.push(f);
            tail.push(-(-exponent).exp_m1());
            density.push(log_slope * f);
        }
        let grid = Self { beta, abscissae, cdf, tail, density };
        grid.validate()?;
        Ok(grid)
    }

    /// Assemble a grid from raw tables without checks. The tables must
    /// share the uniform abscissae of [`TwGrid::build`].
    pub fn from_tables(beta: Beta, cdf: Vec<f64>, tail: Vec<f64>, density: Vec<f64>) -> Self {
        let abscissae = (0..cdf.len()).map(abscissa).collect();
        Self { beta, abscissae, cdf, tail, density }
    }

    /// Monotone, bounded, saturating at both ends.
    pub fn validate(&self) -> Result<()> {
        let fail = |detail: String| Err(Error::Numerical { routine: "tw_grid", detail });
        let len = grid_len();
        if self.abscissae.len() != len || self.cdf.len() != len || self.tail.len() != len || self.density.len() != len {
            return fail(format!("expected {len} nodes"));
        }
        if let Some(i) = self.cdf.iter().position(|&f| !(0.0..=1.0).contains(&f)) {
            return fail(format!("cdf outside [0, 1] at s = {}", self.abscissae[i]));
        }
        if let Some(i) = self.cdf.windows(2).position(|w| w[1] < w[0]) {
            return fail(format!("cdf decreases at s = {}", self.abscissae[i]));
        }
        if let Some(i) = self.tail.windows(2).position(|w| w[1] > w[0]) {
            return fail(format!("tail increases at s = {}", self.abscissae[i]));
        }
        if let Some(i) = self.density.iter().position(|&d| !(d >= 0.0)) {
            return fail(format!("negative density at s = {}", self.abscissae[i]));
        }
        if !(self.cdf[0] < 1e-12 && self.tail[len - 1] < 1e-12) {
            return fail(format!(
                "grid does not saturate: F(min) = {}, 1 - F(max) = {}",
                self.cdf[0],
                self.tail[len - 1]
            ));
        }
        Ok(())
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    pub fn tail_values(&self) -> &[f64] {
        &self.tail
    }

    pub fn density_values(&self) -> &[f64] {
        &self.density
    }

    fn locate(&self, s: f64) -> Option<(usize, f64)> {
        let last = self.abscissae.len() - 1;
        if !(GRID_MIN..=GRID_MAX).contains(&s) {
            return None;
        }
        let i = (((s - GRID_MIN) / GRID_STEP).floor() as usize).min(last - 1);
        Some((i, (s - self.abscissae[i]) / GRID_STEP))
    }

    /// Fritsch–Carlson limited slopes for interval `i`, scaled to unit cell.
    fn cell(values: &[f64], slopes: &[f64], sign: f64, i: usize) -> (f64, f64, f64, f64) {
        let (y0, y1) = (values[i], values[i + 1]);
        let delta = y1 - y0;
        let (mut m0, mut m1) = (sign * slopes[i] * GRID_STEP, sign * slopes[i + 1] * GRID_STEP);
        if delta == 0.0 {
            return (y0, y1, 0.0, 0.0);
        }
        let (a, b) = (m0 / delta, m1 / delta);
        if a < 0.0 {
            m0 = 0.0;
        }
        if b < 0.0 {
            m1 = 0.0;
        }
        let r2 = a * a + b * b;
        if r2 > 9.0 {
            let t = 3.0 / r2.sqrt();
            m0 = t * a * delta;
            m1 = t * b * delta;
        }
        (y0, y1, m0, m1)
    }

    fn hermite(values: &[f64], slopes: &[f64], sign: f64, i: usize, t: f64) -> f64 {
        let (y0, y1, m0, m1) = Self::cell(values, slopes, sign, i);
        let t2 = t * t;
        let t3 = t2 * t;
        // increments relative to y0 keep rounding below the cell's rise
        y0 + (3.0 * t2 - 2.0 * t3) * (y1 - y0) + (t3 - 2.0 * t2 + t) * m0 + (t3 - t2) * m1
    }

    /// Distribution function; exact 0 below and 1 above the grid.
    pub fn cdf(&self, s: f64) -> f64 {
        match self.locate(s) {
            Some((i, t)) => Self::hermite(&self.cdf, &self.density, 1.0, i, t).clamp(0.0, 1.0),
            None if s < GRID_MIN => 0.0,
            None => 1.0,
        }
    }

    /// `1 − F(s)`, interpolated from directly tabulated tail values.
    pub fn tail(&self, s: f64) -> f64 {
        match self.locate(s) {
            Some((i, t)) => Self::hermite(&self.tail, &self.density, -1.0, i, t).clamp(0.0, 1.0),
            None if s < GRID_MIN => 1.0,
            None => 0.0,
        }
    }

    /// Second derivative of the cdf interpolant (piecewise cubic).
    pub fn interpolant_second_derivative(&self, s: f64) -> f64 {
        match self.locate(s) {
            Some((i, t)) => {
                let (y0, y1, m0, m1) = Self::cell(&self.cdf, &self.density, 1.0, i);
                let d2 = (12.0 * t - 6.0) * y0 + (6.0 * t - 4.0) * m0 + (6.0 - 12.0 * t) * y1 + (6.0 * t - 2.0) * m1;
                d2 / (GRID_STEP * GRID_STEP)
            }
            None => 0.0,
        }
    }

    /// `F''(s)` by a central second difference of the tail with step `delta`.
    pub fn cdf_second_difference(&self, s: f64, delta: f64) -> f64 {
        -(self.tail(s + delta) - 2.0 * self.tail(s) + self.tail(s - delta)) / (delta * delta)
    }

    /// Mean of the tabulated distribution by Simpson's rule on `∫ F`.
    pub fn mean(&self) -> f64 {
        let n = self.cdf.len() - 1;
        let mut acc = self.cdf[0] + self.cdf[n];
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * self.cdf[i];
        }
        GRID_MAX - acc * GRID_STEP / 3.0
    }
}

static GRID_REAL: OnceLock<TwGrid> = OnceLock::new();
static GRID_COMPLEX: OnceLock<TwGrid> = OnceLock::new();

/// Shared grid for `beta`, built on first use.
pub fn tw_grid(beta: Beta) -> &'static TwGrid {
    let cell = match beta {
        Beta::Real => &GRID_REAL,
        Beta::Complex => &GRID_COMPLEX,
    };
    cell.get_or_init(|| TwGrid::build(beta).expect("Tracy-Widom grid construction failed"))
}

pub fn tw_cdf(beta: Beta, s: f64) -> f64 {
    tw_grid(beta).cdf(s)
}

/// `1 − TW_β(s)` without cancellation in the right tail.
pub fn tw_upper_tail(beta: Beta, s: f64) -> f64 {
    tw_grid(beta).tail(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenteringConstants {
    pub mu: f64,
    pub sigma: f64,
}

impl CenteringConstants {
    pub fn standardize(&self, x: f64) -> f64 {
        (x - self.mu) / self.sigma
    }
}

/// Edge centering and scaling on the scale of the statistic. The real case
/// uses half-integer shifted dimensions, the complex case the plain ones.
pub fn centering_constants(config: &ModelConfig) -> CenteringConstants {
    let shift = match config.beta {
        Beta::Real => 0.5,
        Beta::Complex => 0.0,
    };
    let (n, p) = (config.n_eff as f64 - shift, config.p_eff as f64 - shift);
    let a = n.sqrt() + p.sqrt();
    let scale = config.n_eff as f64;
    CenteringConstants { mu: a * a / scale, sigma: a * (n.powf(-0.5) + p.powf(-0.5)).cbrt() / scale }
}

/// `Pr(U > x) ≈ 1 − TW_β((x − μ)/σ)`.
pub fn tw_tail(config: &ModelConfig, x: f64) -> f64 {
    tw_upper_tail(config.beta, centering_constants(config).standardize(x))
}

/// Weight of `TW''` in the corrected approximation:
/// `(1/2)(2/(β n p))(μ/σ)²`.
pub fn correction_coefficient(config: &ModelConfig) -> f64 {
    let c = centering_constants(config);
    let np = config.n_eff as f64 * config.p_eff as f64;
    0.5 * (2.0 / (config.beta.value() * np)) * (c.mu / c.sigma).powi(2)
}

/// `1 − TW_β(s) + κ TW_β''(s)` with κ from [`correction_coefficient`] and
/// `TW''` from a central second difference. Can be negative.
pub fn tw_corrected_tail(config: &ModelConfig, x: f64) -> f64 {
    let grid = tw_grid(config.beta);
    let s = centering_constants(config).standardize(x);
    grid.tail(s) + correction_coefficient(config) * grid.cdf_second_difference(s, SECOND_DIFF_STEP)
}

/// CSV with columns `s,F1,F2` on the shared grid.
pub fn write_grid_csv<W: Write>(mut out: W) -> io::Result<()> {
    let (g1, g2) = (tw_grid(Beta::Real), tw_grid(Beta::Complex));
    writeln!(out, "s,F1,F2")?;
    for ((s, f1), f2) in g1.abscissae().iter().zip(g1.cdf_values()).zip(g2.cdf_values()) {
        writeln!(out, "{s},{f1:e},{f2:e}")?;
    }
    Ok(())
}
