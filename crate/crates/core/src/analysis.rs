//! Regime classification and applicability bounds.

use core::f64::consts::PI;

use crate::dynamics::{build_hamiltonian, FockSpace};
use crate::error::{require, Error, Result};
use crate::linalg::eigh_tridiagonal;
use crate::noise::{white_noise_intensity, NoiseChannel, NoiseTarget};
use crate::spectrum::{
    correction_difference, rabi_coefficient, rabi_frequency, resonant_detuning_bare, OscillatorParams, ResonantPair, DEGENERACY_TOL,
};
use crate::twolevel::decay_rate;
#[allow(unused_imports)]
use num_traits::Float;

/// Factor by which "≪" must hold for the validity flags.
pub const SAFETY_FACTOR: f64 = 5.0;

/// Half-width of the band around `Γ/(2ω^R) = 1` classified as critical.
pub const CRITICAL_BAND: f64 = 1e-3;

/// Correction differences below this mean no overdamping bound exists.
pub const KERR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

impl Regime {
    pub fn classify(ratio: f64) -> Self {
        if (ratio - 1.0).abs() < CRITICAL_BAND {
            Regime::Critical
        } else if ratio > 1.0 {
            Regime::Overdamped
        } else {
            Regime::Underdamped
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Underdamped => "underdamped",
            Regime::Critical => "critical",
            Regime::Overdamped => "overdamped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub gamma: f64,
    pub omega_r: f64,
    /// `Γ / (2ω^R)`.
    pub ratio: f64,
    pub regime: Regime,
    /// Lower bound on τ for the two-level reduction.
    pub tau_min_applicability: f64,
    /// `τ · SAFETY_FACTOR ≤ 1/ω^R`.
    pub white_noise_valid: bool,
    /// `τ ≥ SAFETY_FACTOR · tau_min_applicability`.
    pub two_level_valid: bool,
}

/// `4π η² g₀² / (α² ω^R)`: correlation times well above this keep the noise
/// from driving transitions out of the resonant pair.
pub fn applicability_min_tau(params: &OscillatorParams, pair: ResonantPair, g0: f64, delta0: f64, eta: f64) -> Result<f64> {
    let omega_r = rabi_frequency(params, delta0, g0, pair)?;
    require(omega_r.abs() > 0.0, "omega_r", omega_r, "Rabi frequency must be nonzero")?;
    Ok(4.0 * PI * eta * eta * g0 * g0 / (params.alpha * params.alpha * omega_r.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeEstimate {
    pub probability: f64,
    /// Quasienergy gap `ε_k - ε_{n'}` between the dressed states.
    pub gap: f64,
    /// `|V_{k,n'}|`.
    pub matrix_element: f64,
    /// False when the first-order estimate exceeds 0.5.
    pub valid: bool,
}

/// First-order probability `Q|V_{k,n'}|²T / (1 + δε²τ²)` of leaving the dressed
/// `|n'⟩` for the dressed `|k⟩` within `duration`, with `V = a + a†` for
/// amplitude noise and `V = a†a` for frequency noise.
#[allow(clippy::too_many_arguments)]
pub fn escape_probability(
    params: &OscillatorParams,
    pair: ResonantPair,
    k: u32,
    g0: f64,
    delta0: f64,
    channel: &NoiseChannel,
    duration: f64,
    space: FockSpace,
) -> Result<EscapeEstimate> {
    require((k as usize) <= space.cutoff(), "k", k as f64, "exceeds the cutoff")?;
    require(duration >= 0.0, "duration", duration, "must be non-negative")?;
    let eig = eigh_tridiagonal(&build_hamiltonian(params, g0, delta0, space));
    let dressed = |level: usize| {
        (0..eig.dim())
            .max_by(|&a, &b| eig.vector(a)[level].abs().total_cmp(&eig.vector(b)[level].abs()))
            .unwrap_or(level)
    };
    let (jk, j0) = (dressed(k as usize), dressed(pair.lower as usize));
    let gap = eig.values[jk] - eig.values[j0];
    if k == pair.lower || k == pair.upper || jk == j0 || gap.abs() < DEGENERACY_TOL * params.alpha {
        return Err(Error::ResonantTarget { level: k, splitting: gap });
    }
    let (u, v) = (eig.vector(jk), eig.vector(j0));
    let element: f64 = match channel.target {
        NoiseTarget::Amplitude => (0..eig.dim() - 1)
            .map(|i| ((i + 1) as f64).sqrt() * (u[i] * v[i + 1] + u[i + 1] * v[i]))
            .sum(),
        NoiseTarget::Frequency => (0..eig.dim()).map(|i| i as f64 * u[i] * v[i]).sum(),
    };
    let q = white_noise_intensity(channel);
    let probability = q * element * element * duration / (1.0 + gap * gap * channel.tau * channel.tau);
    Ok(EscapeEstimate {
        probability,
        gap,
        matrix_element: element.abs(),
        valid: probability <= 0.5,
    })
}

/// Regime report for amplitude noise of relative strength `eta = σ/g₀` and
/// correlation time `tau`, plus an optional frequency-noise intensity `q2`.
pub fn overdamped_ratio(
    params: &OscillatorParams,
    pair: ResonantPair,
    g0: f64,
    delta0: f64,
    eta: f64,
    tau: f64,
    q2: f64,
) -> Result<RegimeReport> {
    let sigma = eta * g0;
    let channel = NoiseChannel::new(sigma.abs(), tau, NoiseTarget::Amplitude)?;
    let rate = decay_rate(params, pair, g0, delta0, white_noise_intensity(&channel), q2)?;
    let ratio = rate.gamma / (2.0 * rate.omega_r.abs());
    let tau_min = applicability_min_tau(params, pair, g0, delta0, eta)?;
    Ok(RegimeReport {
        gamma: rate.gamma,
        omega_r: rate.omega_r,
        ratio,
        regime: Regime::classify(ratio),
        tau_min_applicability: tau_min,
        white_noise_valid: tau * SAFETY_FACTOR * rate.omega_r.abs() <= 1.0,
        two_level_valid: tau >= SAFETY_FACTOR * tau_min,
    })
}

/// `(√(2π) η |ε_n⁽²⁾ - ε_{n'}⁽²⁾| / ω_{n,n'})` at the bare resonance, with the Rabi coefficient.
fn bound_base(params: &OscillatorParams, pair: ResonantPair, eta: f64) -> Result<(f64, f64)> {
    require(pair.order() >= 3, "pair", pair.order() as f64, "need n - n' >= 3")?;
    require(eta.is_finite() && eta > 0.0, "eta", eta, "must be positive")?;
    let d0 = resonant_detuning_bare(params, pair);
    let diff = correction_difference(params, d0, pair)?;
    if diff.abs() < KERR_TOL {
        return Err(Error::KerrDegenerate { difference: diff });
    }
    let omega = rabi_coefficient(params, d0, pair)?;
    Ok(((2.0 * PI).sqrt() * eta * diff.abs() / omega.abs(), omega.abs()))
}

/// Drive amplitude below which the overdamped regime is reachable while white noise applies.
pub fn overdamp_g_upper_bound(params: &OscillatorParams, pair: ResonantPair, eta: f64) -> Result<f64> {
    let (base, _) = bound_base(params, pair, eta)?;
    Ok(base.powf(1.0 / (pair.order() as f64 - 2.0)))
}

/// Lower bound `T̃` on the Rabi period at which overdamping is reachable.
pub fn rabi_period_lower_bound(params: &OscillatorParams, pair: ResonantPair, eta: f64) -> Result<f64> {
    let (base, omega) = bound_base(params, pair, eta)?;
    let m = pair.order() as f64;
    Ok(2.0 * PI / omega * (1.0 / base).powf(m / (m - 2.0)))
}
