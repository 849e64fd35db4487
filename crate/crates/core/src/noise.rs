//! Stationary exponentially correlated Gaussian noise.
//!
//! Each channel is an Ornstein–Uhlenbeck process with correlator
//! `⟨ξ(t)ξ(t')⟩ = σ² exp(-|t - t'|/τ)`, sampled with its exact discrete update.

use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{require, Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Identifies the generator behind every sampled path; written to run manifests.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9) + StandardNormal ziggurat (rand_distr 0.5), exact OU update";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseTarget {
    /// Fluctuation `ξ₁` of the drive amplitude `g`.
    Amplitude,
    /// Fluctuation `ξ₂` of the detuning `Δ`.
    Frequency,
}

impl NoiseTarget {
    pub fn index(self) -> u64 {
        match self {
            NoiseTarget::Amplitude => 0,
            NoiseTarget::Frequency => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseChannel {
    pub sigma: f64,
    pub tau: f64,
    pub target: NoiseTarget,
}

impl NoiseChannel {
    pub fn new(sigma: f64, tau: f64, target: NoiseTarget) -> Result<Self> {
        require(sigma.is_finite() && sigma >= 0.0, "sigma", sigma, "must be finite and non-negative")?;
        require(tau.is_finite() && tau > 0.0, "tau", tau, "must be finite and positive")?;
        Ok(Self { sigma, tau, target })
    }

    pub fn is_enabled(&self) -> bool {
        self.sigma > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub dt: f64,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl NoisePath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Coefficients of one exact OU step `x' = decay·x + kick·ζ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuStep {
    pub decay: f64,
    pub kick: f64,
}

impl OuStep {
    pub fn new(channel: &NoiseChannel, dt: f64) -> Self {
        let x = dt / channel.tau;
        Self {
            decay: (-x).exp(),
            // √(1 - e^{-2x}) without cancellation for small steps
            kick: channel.sigma * (-(-2.0 * x).exp_m1()).sqrt(),
        }
    }

    /// The step equivalent to `self` followed by `next` (kick as a standard deviation).
    pub fn then(self, next: OuStep) -> OuStep {
        OuStep {
            decay: self.decay * next.decay,
            kick: (next.decay * next.decay * self.kick * self.kick + next.kick * next.kick).sqrt(),
        }
    }

    /// Variance after one step from a state of variance `var`.
    pub fn propagate_variance(&self, var: f64) -> f64 {
        self.decay * self.decay * var + self.kick * self.kick
    }
}

/// Counter-based seed splitting: a SplitMix64 finalizer over (master, trajectory, channel).
pub fn subseed(master: u64, trajectory: u64, channel: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(master) ^ trajectory) ^ channel.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Sample `n_steps` grid values of the channel, starting from the stationary distribution.
pub fn sample_path(channel: &NoiseChannel, dt: f64, n_steps: usize, seed: u64) -> Result<NoisePath> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidStep { dt });
    }
    require(n_steps >= 1, "n_steps", n_steps as f64, "must be at least 1")?;
    if !channel.is_enabled() {
        return Ok(NoisePath {
            dt,
            values: vec![0.0; n_steps],
            seed,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = OuStep::new(channel, dt);
    let mut values = Vec::with_capacity(n_steps);
    let mut x = channel.sigma * rng.sample::<f64, _>(StandardNormal);
    values.push(x);
    for _ in 1..n_steps {
        x = step.decay * x + step.kick * rng.sample::<f64, _>(StandardNormal);
        values.push(x);
    }
    Ok(NoisePath { dt, values, seed })
}

/// White-noise intensity `Q = 2τσ²`.
pub fn white_noise_intensity(channel: &NoiseChannel) -> f64 {
    2.0 * channel.tau * channel.sigma * channel.sigma
}

/// Biased (1/N) sample autocovariance at lags `0..=max_lag`.
pub fn estimate_autocorrelation(path: &NoisePath, max_lag: usize) -> Result<Vec<f64>> {
    let n = path.len();
    if max_lag.saturating_mul(10) >= n {
        return Err(Error::PathTooShort { len: n, max_lag });
    }
    let mean = path.values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = path.values.iter().map(|x| x - mean).collect();
    Ok((0..=max_lag)
        .map(|lag| centered[..n - lag].iter().zip(&centered[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(sigma: f64, tau: f64) -> NoiseChannel {
        NoiseChannel::new(sigma, tau, NoiseTarget::Amplitude).unwrap()
    }

    #[test]
    fn channel_validation() {
        assert!(NoiseChannel::new(-0.1, 1.0, NoiseTarget::Amplitude).is_err());
        assert!(NoiseChannel::new(0.1, 0.0, NoiseTarget::Frequency).is_err());
        assert!(!ch(0.0, 5.0).is_enabled());
    }

    #[test]
    fn disabled_channel_is_zero() {
        let p = sample_path(&ch(0.0, 10.0), 0.5, 100, 7).unwrap();
        assert!(p.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn invalid_step() {
        assert_eq!(sample_path(&ch(0.1, 10.0), 0.0, 10, 1), Err(Error::InvalidStep { dt: 0.0 }));
        assert!(matches!(sample_path(&ch(0.1, 10.0), -1.0, 10, 1), Err(Error::InvalidStep { .. })));
    }

    #[test]
    fn intensity_values() {
        assert!((white_noise_intensity(&ch(0.0202931, 1000.0)) - 0.823620).abs() < 1e-6);
        assert!((white_noise_intensity(&ch(0.0075692, 2000.0)) - 0.2291714).abs() < 1e-6);
        assert_eq!(white_noise_intensity(&ch(0.0, 3.0)), 0.0);
    }

    #[test]
    fn autocorrelation_guards_and_zero_path() {
        let p = NoisePath {
            dt: 1.0,
            values: vec![0.0; 100],
            seed: 0,
        };
        assert_eq!(estimate_autocorrelation(&p, 9).unwrap(), vec![0.0; 10]);
        assert!(matches!(estimate_autocorrelation(&p, 10), Err(Error::PathTooShort { .. })));
    }

    #[test]
    fn fine_steps_compose_to_coarse_step() {
        let c = ch(0.0138884, 100.0);
        let fine = OuStep::new(&c, 0.1);
        let composed = (1..50).fold(fine, |acc, _| acc.then(fine));
        let coarse = OuStep::new(&c, 5.0);
        assert!((composed.decay - coarse.decay).abs() < 1e-12);
        assert!((composed.kick - coarse.kick).abs() < 1e-12);
    }

    #[test]
    fn subseeds_differ() {
        let s = [subseed(1, 0, 0), subseed(1, 0, 1), subseed(1, 1, 0), subseed(2, 0, 0)];
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                assert_ne!(s[i], s[j]);
            }
        }
    }
}
