//! Parameter scans and the reference-table audit.

use kerr_rabi_core::analysis::{overdamped_ratio, rabi_period_lower_bound, RegimeReport};
use kerr_rabi_core::noise::{sample_path, subseed, NoiseChannel, NoiseTarget};
use kerr_rabi_core::spectrum::{
    correction_difference, correction_difference_linear, quasienergy_bare, quasienergy_curves, resonant_detuning_bare, OscillatorParams,
    ResonantPair,
};
use kerr_rabi_core::{Error as CoreError, FockSpace};

use crate::error::{AppError, ConfigError};
use crate::output::{csv, fmt_f64};
use crate::presets::{ETA, TABLE1};

fn bad(key: &str, message: &str) -> AppError {
    AppError::Config(ConfigError::Value {
        key: key.to_string(),
        message: message.to_string(),
    })
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Bare quasienergies versus Fock number: `n,epsilon0`.
pub fn parabola(params: &OscillatorParams, delta: f64, space: FockSpace) -> String {
    let n: Vec<f64> = (0..space.dim()).map(|k| k as f64).collect();
    let e: Vec<f64> = (0..space.dim()).map(|k| quasienergy_bare(params, delta, k as u32)).collect();
    csv(&["n", "epsilon0"], &[&n, &e], fmt_f64)
}

/// Tracked quasienergies versus drive amplitude: `g,eps_0,…,eps_cutoff`.
pub fn curves(
    params: &OscillatorParams,
    pair: ResonantPair,
    delta: f64,
    g_max: f64,
    points: usize,
    space: FockSpace,
) -> Result<String, AppError> {
    if g_max.is_nan() || g_max <= 0.0 || points < 2 {
        return Err(bad("g_max", "need g_max > 0 and at least 2 points"));
    }
    let grid = linspace(0.0, g_max, points);
    let c = quasienergy_curves(params, delta, &grid, space, pair)?;
    let names: Vec<String> = (0..space.dim()).map(|k| format!("eps_{k}")).collect();
    let mut header = vec!["g"];
    header.extend(names.iter().map(String::as_str));
    let mut cols: Vec<&[f64]> = vec![&grid];
    cols.extend(c.levels.iter().map(Vec::as_slice));
    Ok(csv(&header, &cols, fmt_f64))
}

/// Exact and first-order correction differences at the bare resonance: `kappa,diff_exact,diff_linear`.
pub fn corrections(pair: ResonantPair, kappa_min: f64, kappa_max: f64, points: usize) -> Result<String, AppError> {
    if points == 0 || kappa_min.is_nan() || kappa_max.is_nan() || kappa_max < kappa_min {
        return Err(bad("kappa", "need kappa_min <= kappa_max and at least 1 point"));
    }
    let ks = linspace(kappa_min, kappa_max, points);
    let mut exact = Vec::with_capacity(points);
    let mut linear = Vec::with_capacity(points);
    for &k in &ks {
        let p = OscillatorParams::with_kappa(k).map_err(|e| bad("kappa", &e.to_string()))?;
        exact.push(correction_difference(&p, resonant_detuning_bare(&p, pair), pair)?);
        linear.push(correction_difference_linear(&p, pair));
    }
    Ok(csv(&["kappa", "diff_exact", "diff_linear"], &[&ks, &exact, &linear], fmt_f64))
}

/// Period bound versus κ on a logarithmic grid for `n - n' ∈ {3, 4, 5}`: `kappa,n,nprime,T_tilde`.
/// Grid points where a third level is degenerate with the pair are omitted.
pub fn ttilde(kappa_min: f64, kappa_max: f64, points: usize, eta: f64) -> Result<String, AppError> {
    if kappa_min == 0.0 || kappa_max == 0.0 || kappa_min.signum() != kappa_max.signum() || points == 0 {
        return Err(bad("kappa", "range must be nonzero, single-signed, with at least 1 point"));
    }
    let sign = kappa_min.signum();
    let (la, lb) = (kappa_min.abs().ln(), kappa_max.abs().ln());
    let (mut k, mut n, mut np, mut t) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for order in [3u32, 4, 5] {
        let pair = ResonantPair::new(order, 0)?;
        for l in linspace(la, lb, points) {
            let kappa = sign * l.exp();
            let p = OscillatorParams::with_kappa(kappa).map_err(|e| bad("kappa", &e.to_string()))?;
            let bound = match rabi_period_lower_bound(&p, pair, eta) {
                Err(CoreError::DegenerateLevels { .. }) => continue,
                other => other?,
            };
            k.push(kappa);
            n.push(order as f64);
            np.push(0.0);
            t.push(bound);
        }
    }
    let mut out = String::from("kappa,n,nprime,T_tilde\n");
    for i in 0..k.len() {
        out.push_str(&format!("{},{},{},{}\n", fmt_f64(k[i]), n[i] as u32, np[i] as u32, fmt_f64(t[i])));
    }
    Ok(out)
}

/// Regime reports for every table row at its `(g, Δ_full, τ)` with η = 0.1.
pub fn audit_reports() -> Result<Vec<(usize, RegimeReport)>, AppError> {
    TABLE1
        .iter()
        .map(|r| Ok((r.row, overdamped_ratio(&r.params(), r.pair(), r.g, r.delta_full, ETA, r.tau, 0.0)?)))
        .collect()
}

/// `row,gamma,omega_r,ratio,regime`.
pub fn audit_table1() -> Result<String, AppError> {
    let mut out = String::from("row,gamma,omega_r,ratio,regime\n");
    for (row, r) in audit_reports()? {
        out.push_str(&format!(
            "{row},{},{},{},{}\n",
            fmt_f64(r.gamma),
            fmt_f64(r.omega_r),
            fmt_f64(r.ratio),
            r.regime.as_str()
        ));
    }
    Ok(out)
}

/// `t,xi1,xi2` for trajectory 0 of `seed`.
pub fn dump_noise(
    amplitude: Option<NoiseChannel>,
    frequency: Option<NoiseChannel>,
    dt: f64,
    steps: usize,
    seed: u64,
) -> Result<String, AppError> {
    let path = |c: Option<NoiseChannel>, target: NoiseTarget| -> Result<Vec<f64>, AppError> {
        match c {
            Some(c) => Ok(sample_path(&c, dt, steps, subseed(seed, 0, target.index()))?.values),
            None => Ok(vec![0.0; steps]),
        }
    };
    let x1 = path(amplitude, NoiseTarget::Amplitude)?;
    let x2 = path(frequency, NoiseTarget::Frequency)?;
    let t: Vec<f64> = (0..steps).map(|k| k as f64 * dt).collect();
    Ok(csv(&["t", "xi1", "xi2"], &[&t, &x1, &x2], fmt_f64))
}
