//! Streaming mean/variance of weights supplied on the log scale.
//!
//! Weights are stored relative to `exp(shift)` so that values far outside
//! the range of `f64` still aggregate; partials merge exactly
//! (Chan et al. parallel update) and a fixed merge order keeps results
//! reproducible.

/// Running moments of `exp(log_w)` values, zeros included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogWelford {
    count: u64,
    shift: f64,
    mean: f64,
    m2: f64,
}

impl Default for LogWelford {
    fn default() -> Self {
        Self::new()
    }
}

impl LogWelford {
    pub fn new() -> Self {
        Self { count: 0, shift: f64::NEG_INFINITY, mean: 0.0, m2: 0.0 }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn rescale(&mut self, shift: f64) {
        if shift > self.shift {
            if self.shift.is_finite() {
                let f = (self.shift - shift).exp();
                self.mean *= f;
                self.m2 *= f * f;
            }
            self.shift = shift;
        }
    }

    /// Add a weight given by its logarithm; `-inf` is a zero weight.
    pub fn push_log(&mut self, log_w: f64) {
        debug_assert!(!log_w.is_nan());
        if log_w > self.shift {
            self.rescale(log_w);
        }
        let v = if log_w == f64::NEG_INFINITY { 0.0 } else { (log_w - self.shift).exp() };
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    pub fn push(&mut self, w: f64) {
        self.push_log(if w > 0.0 { w.ln() } else { f64::NEG_INFINITY });
    }

    pub fn merge(&mut self, other: &LogWelford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let mut other = *other;
        let shift = self.shift.max(other.shift);
        self.rescale(shift);
        other.rescale(shift);
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        self.mean += delta * nb / n;
        self.m2 += other.m2 + delta * delta * na * nb / n;
        self.count += other.count;
    }

    /// Natural log of the sample mean.
    pub fn log_mean(&self) -> f64 {
        if self.count == 0 || self.mean <= 0.0 {
            f64::NEG_INFINITY
        } else {
            self.mean.ln() + self.shift
        }
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.log_mean().exp()
        }
    }

    /// Unbiased (N−1) sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let v = (self.m2 / (self.count - 1) as f64).max(0.0);
        if v == 0.0 {
            0.0
        } else {
            (v.ln() + 2.0 * self.shift).exp()
        }
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    /// `sd / mean`, computed before leaving the shifted scale.
    pub fn rel_sd(&self) -> Option<f64> {
        if self.count < 2 || self.mean <= 0.0 {
            return None;
        }
        let v = (self.m2 / (self.count - 1) as f64).max(0.0);
        Some(v.sqrt() / self.mean)
    }
}
