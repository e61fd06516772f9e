//! Airy function of the first kind and a log-gamma entry point.

/// Ai(0)
const AI0: f64 = 0.355_028_053_887_817_239_260_063_186_004_183_6;
/// -Ai'(0)
const AIP0: f64 = 0.258_819_403_792_806_798_405_183_560_189_203_0;

/// Argument above which the asymptotic expansion replaces the power series.
pub const AIRY_SERIES_LIMIT: f64 = 5.0;

/// `(Ai(t), Ai'(t))`.
///
/// Maclaurin series for `t <= 5`, asymptotic expansion beyond. The series
/// loses relative accuracy for large negative `t`; the callers here only
/// evaluate it on `[-5, 5]`.
pub fn airy_ai(t: f64) -> (f64, f64) {
    if t > AIRY_SERIES_LIMIT {
        airy_asymptotic(t)
    } else {
        airy_series(t)
    }
}

fn airy_series(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f = sum a_k, g = sum b_k, with derivative series fp, gp
    let (mut a, mut b) = (1.0, x);
    let (mut ap, mut bp) = (0.0, 1.0);
    let (mut f, mut g, mut fp, mut gp) = (a, b, ap, bp);
    for k in 1..200 {
        let k3 = 3.0 * k as f64;
        a *= x3 / ((k3 - 1.0) * k3);
        b *= x3 / (k3 * (k3 + 1.0));
        ap = if k == 1 { x * x / 2.0 } else { ap * x3 / ((k3 - 1.0) * k3) * (k3 / (k3 - 3.0)) };
        bp *= x3 / (k3 * (k3 + 1.0)) * ((k3 + 1.0) / (k3 - 2.0));
        f += a;
        g += b;
        fp += ap;
        gp += bp;
        let scale = f.abs() + g.abs() + fp.abs() + gp.abs();
        if a.abs() + b.abs() + ap.abs() + bp.abs() <= 1e-17 * scale {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * fp - AIP0 * gp)
}

fn airy_asymptotic(t: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * t.powf(1.5);
    let pre = (-zeta).exp() / (2.0 * std::f64::consts::PI.sqrt());
    let (mut u, mut su, mut sv) = (1.0, 1.0, 1.0);
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        let term = u / zeta.powi(k);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        su += sign * term;
        sv += sign * v / zeta.powi(k);
        if term.abs() < 1e-17 {
            break;
        }
    }
    (pre / t.powf(0.25) * su, -pre * t.powf(0.25) * sv)
}

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // DLMF / Abramowitz–Stegun tabulations
        let cases = [
            (0.0, 0.355_028_053_887_817_2, -0.258_819_403_792_806_8),
            (1.0, 0.135_292_416_312_881_47, -0.159_147_441_296_793_28),
            (-2.0, 0.227_407_428_201_685_6, 0.618_259_020_741_691_1),
            (2.0, 0.034_924_130_423_274_36, -0.053_090_384_433_653_88),
            (8.0, 4.692_207_616_099_224e-8, -1.341_439_297_906_784e-7),
        ];
        for (t, ai, aip) in cases {
            let (a, ap) = airy_ai(t);
            assert!(((a - ai) / ai).abs() < 1e-10, "Ai({t}) = {a}, want {ai}");
            assert!(((ap - aip) / aip).abs() < 1e-10, "Ai'({t}) = {ap}, want {aip}");
        }
    }

    #[test]
    fn branches_agree_at_switch() {
        let (s, sp) = airy_series(AIRY_SERIES_LIMIT);
        let (a, ap) = airy_asymptotic(AIRY_SERIES_LIMIT);
        assert!(((s - a) / a).abs() < 1e-6);
        assert!(((sp - ap) / ap).abs() < 1e-6);
    }

    #[test]
    fn satisfies_airy_equation() {
        // Ai'' = t Ai, checked by central differences of Ai'
        for t in [-3.0, -0.5, 0.7, 3.3, 6.5, 9.0] {
            let h = 1e-5;
            let app = (airy_ai(t + h).1 - airy_ai(t - h).1) / (2.0 * h);
            let ai = airy_ai(t).0;
            assert!((app - t * ai).abs() < 1e-7 * (1.0 + (t * ai).abs()), "t = {t}");
        }
    }

    #[test]
    fn ln_gamma_half_integers() {
        let pi = std::f64::consts::PI;
        assert!((ln_gamma(0.5) - pi.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(2.5) - (0.75 * pi.sqrt()).ln()).abs() < 1e-14);
    }
}
