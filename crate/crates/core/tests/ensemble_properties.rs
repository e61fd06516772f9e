use proptest::prelude::*;
use wishart_tail::ensemble::{
    build_full_laguerre_bidiagonal, build_laguerre_bidiagonal, minor_spectrum, ratio_statistic,
    sample_wishart_dense,
};
use wishart_tail::rng::StreamFactory;
use wishart_tail::{Beta, ModelConfig, Spectrum};

#[test]
fn minor_spectrum_mean_matches_first_moment() {
    for beta in [Beta::Real, Beta::Complex] {
        let c = ModelConfig::new(400, 200, beta).unwrap();
        let f = StreamFactory::new(100 + beta.as_u8() as u64);
        let reps = 200;
        let mut total = 0.0;
        for i in 0..reps {
            let m = build_laguerre_bidiagonal(&c, &mut f.stream(i)).unwrap();
            let s = minor_spectrum(&m, &c).unwrap();
            total += s.sum() / s.len() as f64 * 400.0 / 399.0;
        }
        let mean = total / reps as f64;
        assert!((mean - beta.value()).abs() < 0.02, "β={beta}: {mean}");
    }
}

#[test]
fn largest_eigenvalue_upper_percentile_near_edge() {
    let c = ModelConfig::new(200, 200, Beta::Real).unwrap();
    let f = StreamFactory::new(200);
    let mut top: Vec<f64> = (0..2000)
        .map(|i| sample_wishart_dense(&c, &mut f.stream(i)).unwrap().largest().unwrap())
        .collect();
    top.sort_by(f64::total_cmp);
    let q99 = top[(0.99 * top.len() as f64).ceil() as usize - 1];
    assert!((3.9..=4.6).contains(&q99), "{q99}");
}

fn two_sample_ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[test]
fn tridiagonal_and_dense_statistics_agree() {
    let c = ModelConfig::new(50, 10, Beta::Real).unwrap();
    let draws = 10_000;
    let f = StreamFactory::new(300);
    let g = StreamFactory::new(301);
    let tri: Vec<f64> = (0..draws)
        .map(|i| {
            let s = build_full_laguerre_bidiagonal(&c, &mut f.stream(i)).unwrap().spectrum(50.0).unwrap();
            ratio_statistic(&s, 1, 10).unwrap()
        })
        .collect();
    let dense: Vec<f64> = (0..draws)
        .map(|i| ratio_statistic(&sample_wishart_dense(&c, &mut g.stream(i)).unwrap(), 1, 10).unwrap())
        .collect();
    let d = two_sample_ks(tri, dense);
    // 0.1% critical value 1.949·√(2/N)
    let crit = 1.949 * (2.0 / draws as f64).sqrt();
    assert!(d < crit, "KS {d} >= {crit}");
}

#[test]
fn wide_matrices_use_switched_labels() {
    let c = ModelConfig::new(8, 30, Beta::Complex).unwrap();
    assert_eq!((c.n_eff, c.p_eff), (30, 8));
    let f = StreamFactory::new(400);
    let dense = sample_wishart_dense(&c, &mut f.stream(0)).unwrap();
    assert_eq!(dense.len(), 8);
    let minor = minor_spectrum(&build_laguerre_bidiagonal(&c, &mut f.stream(1)).unwrap(), &c).unwrap();
    assert_eq!(minor.len(), 7);
}

proptest! {
    #[test]
    fn statistic_scale_invariant_and_bounded(
        values in prop::collection::vec(0.0..50.0f64, 2..30),
        scale in 1e-3..1e3f64,
        k_frac in 0.0..1.0f64,
    ) {
        prop_assume!(values.iter().sum::<f64>() > 1e-6);
        let s = Spectrum::from_unsorted(values.clone()).unwrap();
        let m = s.len();
        let k = 1 + ((m - 1) as f64 * k_frac) as usize;
        let u = ratio_statistic(&s, k, m).unwrap();
        let scaled = Spectrum::from_unsorted(values.iter().map(|v| v * scale).collect()).unwrap();
        let us = ratio_statistic(&scaled, k, m).unwrap();
        prop_assert!((u - us).abs() <= 1e-12 * u);
        // top-k average is at least the overall average
        prop_assert!(u >= k as f64 * (1.0 - 1e-12) && u <= m as f64 * (1.0 + 1e-12));
        if k == 1 {
            prop_assert!(u >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn sampled_spectra_are_valid(seed in any::<u64>(), n in 2usize..60, p in 2usize..60, complex in any::<bool>()) {
        let beta = if complex { Beta::Complex } else { Beta::Real };
        let c = ModelConfig::new(n, p, beta).unwrap();
        let mut rng = StreamFactory::new(seed).stream(0);
        let s = build_full_laguerre_bidiagonal(&c, &mut rng).unwrap().spectrum(c.n_eff as f64).unwrap();
        prop_assert_eq!(s.len(), c.p_eff);
        prop_assert!(s.values().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.values().iter().all(|&v| v >= 0.0));
    }
}
