//! Built-in invariant checks.

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, ValueEnum};
use wishart_tail::estimators::{run, Method, RunSpec};
use wishart_tail::mplaw::{MpLaw, StieltjesEval};
use wishart_tail::oracle::tail_probability;
use wishart_tail::tracywidom::{tw_grid, TwGrid};
use wishart_tail::{Beta, ModelConfig};

#[derive(Args)]
pub struct SelftestArgs {
    /// Skip the quadrature oracles.
    #[arg(long)]
    quick: bool,
    /// Corrupt an input before checking it (exercises the failure path).
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<Fault>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    TwGrid,
}

type CheckResult = Result<String, String>;
type Check = Box<dyn Fn() -> CheckResult>;

const BETAS: [Beta; 2] = [Beta::Real, Beta::Complex];

fn mp_moments() -> CheckResult {
    let mut worst = 0.0f64;
    for gamma in [0.1, 0.5, 1.0] {
        for beta in BETAS {
            let law = MpLaw::new(gamma, beta).map_err(|e| e.to_string())?;
            let b = beta.value();
            let expected = [1.0, b, b * b * (1.0 + gamma)];
            for (j, want) in expected.into_iter().enumerate() {
                let got = law.integrate(|s| s.powi(j as i32)).map_err(|e| e.to_string())?;
                let err = (got - want).abs() / want;
                worst = worst.max(err);
                if err > 1e-9 {
                    return Err(format!("γ={gamma} β={beta}: moment {j} is {got}, expected {want}"));
                }
            }
        }
    }
    Ok(format!("max relative error {worst:.1e}"))
}

fn rate_limits() -> CheckResult {
    for gamma in [0.02, 0.5, 1.0] {
        for beta in BETAS {
            let law = MpLaw::new(gamma, beta).map_err(|e| e.to_string())?;
            let edge = (1.0 + gamma.sqrt()).powi(2);
            if law.edge_rate_limit().abs() > 1e-9 {
                return Err(format!("γ={gamma} β={beta}: edge rate {}", law.edge_rate_limit()));
            }
            let far = law.rate(1e6).map_err(|e| e.to_string())?;
            if (far - 0.5).abs() > 1e-5 {
                return Err(format!("γ={gamma} β={beta}: rate at 1e6 is {far}"));
            }
            let mut prev = 0.0;
            for i in 1..=20 {
                let r = law.rate(edge * (1.0 + 0.05 * i as f64)).map_err(|e| e.to_string())?;
                if !(r > prev && r < 0.5) {
                    return Err(format!("γ={gamma} β={beta}: rate {r} not increasing inside (0, 1/2)"));
                }
                prev = r;
            }
        }
    }
    Ok("edge limit 0, far limit 1/2, increasing in between".into())
}

fn stieltjes_quadrature() -> CheckResult {
    let mut worst = 0.0f64;
    for gamma in [0.02, 0.1, 0.5, 1.0] {
        for beta in BETAS {
            let law = MpLaw::new(gamma, beta).map_err(|e| e.to_string())?;
            for t in [1e-3, 1e-1, 1.0, 10.0] {
                let z = law.upper + t;
                let closed = law.stieltjes(z).map_err(|e| e.to_string())?;
                let quad = law.stieltjes_with(z, StieltjesEval::Quadrature).map_err(|e| e.to_string())?;
                worst = worst.max((closed - quad).abs());
            }
        }
    }
    if worst > 1e-9 {
        return Err(format!("closed form and quadrature differ by {worst:.2e}"));
    }
    Ok(format!("max gap {worst:.1e}"))
}

fn small_p_unbiasedness() -> CheckResult {
    let mut parts = Vec::new();
    for (n, p, x, seed) in [(6, 2, 1.6, 11), (10, 3, 2.2, 12)] {
        let c = ModelConfig::new(n, p, Beta::Real).map_err(|e| e.to_string())?;
        let exact = tail_probability(&c, x).map_err(|e| e.to_string())?;
        let s = run(&RunSpec::new(c, x, Method::Is, 200_000, seed).with_rate(Some(0.3))).map_err(|e| e.to_string())?;
        let z = (s.estimate - exact) / s.se;
        if z.abs() > 4.0 {
            return Err(format!("n={n} p={p} x={x}: estimate {:.5e} vs {exact:.5e}, z = {z:.2}", s.estimate));
        }
        parts.push(format!("n={n} p={p} x={x} z={z:.2}"));
    }
    Ok(parts.join(", "))
}

fn check_grid(grid: &TwGrid, mean: f64) -> CheckResult {
    grid.validate().map_err(|e| e.to_string())?;
    if (grid.mean() - mean).abs() > 1e-4 {
        return Err(format!("β={}: mean {} differs from {mean}", grid.beta(), grid.mean()));
    }
    Ok(format!("β={} monotone, saturating, mean {:.5}", grid.beta(), grid.mean()))
}

fn tw_grids(fault: Option<Fault>) -> CheckResult {
    let real = tw_grid(Beta::Real);
    let mut parts = Vec::new();
    if fault == Some(Fault::TwGrid) {
        let mut cdf = real.cdf_values().to_vec();
        let mid = cdf.len() / 2;
        cdf.swap(mid, mid + 1);
        let corrupted =
            TwGrid::from_tables(Beta::Real, cdf, real.tail_values().to_vec(), real.density_values().to_vec());
        parts.push(check_grid(&corrupted, -1.20653)?);
    } else {
        parts.push(check_grid(real, -1.20653)?);
    }
    parts.push(check_grid(tw_grid(Beta::Complex), -1.77109)?);
    Ok(parts.join("; "))
}

fn determinism() -> CheckResult {
    let c = ModelConfig::new(100, 10, Beta::Real).map_err(|e| e.to_string())?;
    let spec = RunSpec::new(c, 1.95, Method::Is, 2_000, 3);
    let a = run(&spec).map_err(|e| e.to_string())?;
    let b = run(&spec.clone().with_workers(4)).map_err(|e| e.to_string())?;
    if a.estimate.to_bits() != b.estimate.to_bits() || a.sd.to_bits() != b.sd.to_bits() {
        return Err(format!("workers 1 and 4 disagree: {:e} vs {:e}", a.estimate, b.estimate));
    }
    Ok("workers 1 and 4 bit-identical".into())
}

pub fn cmd_selftest(args: &SelftestArgs) -> ExitCode {
    let fault = args.inject_fault;
    let mut checks: Vec<(&str, Check)> = vec![
        ("mp-moments", Box::new(mp_moments)),
        ("rate-limits", Box::new(rate_limits)),
        ("tw-grid", Box::new(move || tw_grids(fault))),
        ("determinism", Box::new(determinism)),
    ];
    if !args.quick {
        checks.push(("stieltjes-quadrature", Box::new(stieltjes_quadrature)));
        checks.push(("small-p-unbiasedness", Box::new(small_p_unbiasedness)));
    }
    let mut failed = Vec::new();
    for (name, check) in &checks {
        let started = Instant::now();
        let secs = || started.elapsed().as_secs_f64();
        match check() {
            Ok(detail) => println!("check {name}: PASS ({detail}) [{:.2}s]", secs()),
            Err(detail) => {
                println!("check {name}: FAIL ({detail}) [{:.2}s]", secs());
                failed.push(*name);
            }
        }
    }
    if failed.is_empty() {
        println!("selftest: all {} checks passed", checks.len());
        ExitCode::SUCCESS
    } else {
        println!("selftest: failed checks: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
