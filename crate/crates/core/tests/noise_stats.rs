use kerr_rabi_core::noise::*;

const N: usize = 1_000_000;

fn row6() -> NoiseChannel {
    NoiseChannel::new(0.0138884, 100.0, NoiseTarget::Amplitude).unwrap()
}

#[test]
fn variance_and_correlation_at_one_tau() {
    let c = row6();
    // dt = τ/20, the integrator's noise step
    let p = sample_path(&c, 5.0, N, 2024).unwrap();
    let acf = estimate_autocorrelation(&p, 20).unwrap();
    let s2 = c.sigma * c.sigma;
    assert!((acf[0] / s2 - 1.0).abs() < 0.05, "{}", acf[0] / s2);
    assert!((acf[20] / (s2 * (-1.0f64).exp()) - 1.0).abs() < 0.05);
}

#[test]
fn correlation_at_three_tau() {
    let c = NoiseChannel::new(1.0, 10.0, NoiseTarget::Frequency).unwrap();
    let p = sample_path(&c, 0.5, N, 77).unwrap();
    let acf = estimate_autocorrelation(&p, 60).unwrap();
    assert!((acf[60] / (-3.0f64).exp() - 1.0).abs() < 0.10);
}

#[test]
fn lag_one_correlation_matches_exact_update() {
    let c = NoiseChannel::new(1.0, 10.0, NoiseTarget::Amplitude).unwrap();
    for dt in [0.5, 5.0, 20.0] {
        let p = sample_path(&c, dt, N, 5).unwrap();
        let acf = estimate_autocorrelation(&p, 1).unwrap();
        let r = acf[1] / acf[0];
        assert!((r - (-dt / 10.0f64).exp()).abs() < 4.0 / (N as f64).sqrt(), "dt {dt}: {r}");
    }
}

#[test]
fn window_means_are_stationary() {
    let c = row6();
    let p = sample_path(&c, 5.0, N, 11).unwrap();
    // with correlation, the effective sample count is N(1-a)/(1+a)
    let a = (-5.0f64 / 100.0).exp();
    for w in p.values.chunks(200_000) {
        let n_eff = w.len() as f64 * (1.0 - a) / (1.0 + a);
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        assert!(mean.abs() < 4.0 * c.sigma / n_eff.sqrt());
    }
}

#[test]
fn channels_from_distinct_subseeds_are_uncorrelated() {
    let a = NoiseChannel::new(1.0, 1.0, NoiseTarget::Amplitude).unwrap();
    let f = NoiseChannel::new(1.0, 1.0, NoiseTarget::Frequency).unwrap();
    let x = sample_path(&a, 1.0, N, subseed(42, 3, 0)).unwrap();
    let y = sample_path(&f, 1.0, N, subseed(42, 3, 1)).unwrap();
    let (mx, my) = (x.values.iter().sum::<f64>() / N as f64, y.values.iter().sum::<f64>() / N as f64);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (u, v) in x.values.iter().zip(&y.values) {
        sxy += (u - mx) * (v - my);
        sxx += (u - mx) * (u - mx);
        syy += (v - my) * (v - my);
    }
    let r = sxy / (sxx * syy).sqrt();
    // lag-1 correlation e^{-1} inflates the variance of r by (1+a²)/(1-a²)
    let a2 = (-2.0f64).exp();
    assert!(r.abs() < 4.0 * ((1.0 + a2) / (1.0 - a2) / N as f64).sqrt(), "{r}");
}

#[test]
fn fine_and_coarse_grids_share_marginal_variance() {
    let c = row6();
    let fine = OuStep::new(&c, c.tau / 1000.0);
    let coarse = OuStep::new(&c, c.tau / 20.0);
    let s2 = c.sigma * c.sigma;
    let mut v = s2;
    for _ in 0..50 {
        v = fine.propagate_variance(v);
    }
    assert!((v - coarse.propagate_variance(s2)).abs() < 1e-12);
    assert!((v - s2).abs() < 1e-12);
}
