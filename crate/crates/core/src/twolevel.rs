//! Effective two-level model of a resonant pair `(|n'⟩, |n⟩)`.
//!
//! Index 0 is always the lower level `|n'⟩`. The linearized Hamiltonian is
//! `H₀ + ξ₁(t) V₁ + ξ₂(t) V₂`; in the white-noise limit the noise-averaged
//! density matrix obeys a GKSL equation with jump operators `V₁`, `V₂`.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::dynamics::{default_stride, DriveSchedule, InversionTrace, PropagationOptions, Recorder};
use crate::error::{require, Result};
use crate::linalg::Sym2;
use crate::noise::NoiseChannel;
use crate::ode::{dopri5, Tolerance};
use crate::spectrum::{quasienergy_bare, rabi_coefficient, rabi_frequency, second_order_correction, OscillatorParams, ResonantPair};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelBlocks {
    pub h0: Sym2,
    pub v1: Sym2,
    /// Diagonal of `V₂`: `(-n', -n)`.
    pub v2: [f64; 2],
    pub pair: ResonantPair,
    pub g0: f64,
    pub delta0: f64,
    /// Bare quasienergies `(ε_{n'}⁽⁰⁾, ε_n⁽⁰⁾)` at `delta0`.
    pub eps0: [f64; 2],
    /// Second-order coefficients `(ε_{n'}⁽²⁾, ε_n⁽²⁾)` at `delta0`.
    pub eps2: [f64; 2],
    /// Rabi coefficient `ω_{n,n'}`.
    pub omega: f64,
}

impl TwoLevelBlocks {
    pub fn order(&self) -> u32 {
        self.pair.order()
    }

    /// Rabi frequency at the mean drive, `H₁₂`.
    pub fn rabi_frequency(&self) -> f64 {
        self.h0.a12
    }

    /// Instantaneous Hamiltonian for the noise values `(ξ₁, ξ₂)`.
    pub fn hamiltonian(&self, xi1: f64, xi2: f64, mode: EffectiveMode) -> Sym2 {
        let levels = [self.pair.lower as f64, self.pair.upper as f64];
        match mode {
            EffectiveMode::FullEffective => {
                let g = self.g0 + xi1;
                Sym2::new(
                    self.eps0[0] + self.eps2[0] * g * g - xi2 * levels[0],
                    self.eps0[1] + self.eps2[1] * g * g - xi2 * levels[1],
                    self.omega * g.powi(self.order() as i32),
                )
            }
            EffectiveMode::Linearized => Sym2::new(
                self.h0.a11 + xi1 * self.v1.a11 + xi2 * self.v2[0],
                self.h0.a22 + xi1 * self.v1.a22 + xi2 * self.v2[1],
                self.h0.a12 + xi1 * self.v1.a12,
            ),
        }
    }
}

pub fn build_blocks(params: &OscillatorParams, pair: ResonantPair, g0: f64, delta0: f64) -> Result<TwoLevelBlocks> {
    require(g0.is_finite(), "g0", g0, "must be finite")?;
    require(delta0.is_finite(), "delta0", delta0, "must be finite")?;
    let eps0 = [
        quasienergy_bare(params, delta0, pair.lower),
        quasienergy_bare(params, delta0, pair.upper),
    ];
    let eps2 = [
        second_order_correction(params, delta0, pair.lower)?,
        second_order_correction(params, delta0, pair.upper)?,
    ];
    let omega = rabi_coefficient(params, delta0, pair)?;
    let m = pair.order() as i32;
    let g2 = g0 * g0;
    Ok(TwoLevelBlocks {
        h0: Sym2::new(eps0[0] + eps2[0] * g2, eps0[1] + eps2[1] * g2, omega * g0.powi(m)),
        v1: Sym2::new(2.0 * eps2[0] * g0, 2.0 * eps2[1] * g0, omega * m as f64 * g0.powi(m - 1)),
        v2: [-(pair.lower as f64), -(pair.upper as f64)],
        pair,
        g0,
        delta0,
        eps0,
        eps2,
        omega,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EffectiveMode {
    /// `g(t)^{n-n'}` and `g(t)²` kept unexpanded.
    #[default]
    FullEffective,
    /// First order in the noise: `H₀ + ξ₁V₁ + ξ₂V₂`.
    Linearized,
}

/// Stochastic propagation of the two-level model from `|n'⟩` with exact 2×2 exponentials.
///
/// The schedule's `g0`/`delta0` must equal those the blocks were built at;
/// its noise paths supply `ξ₁`, `ξ₂`.
pub fn propagate_effective(
    blocks: &TwoLevelBlocks,
    schedule: &DriveSchedule,
    mode: EffectiveMode,
    options: PropagationOptions,
) -> Result<InversionTrace> {
    require(schedule.g0 == blocks.g0, "schedule.g0", schedule.g0, "must match the blocks")?;
    require(
        schedule.delta0 == blocks.delta0,
        "schedule.delta0",
        schedule.delta0,
        "must match the blocks",
    )?;
    let stride = options.stride.unwrap_or_else(|| default_stride(schedule.n_steps));
    let records = schedule.record_steps(stride);
    let mut rec = Recorder::new(records.len(), options.record_populations);
    let start = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];

    if !schedule.is_noisy() {
        let h = blocks.hamiltonian(0.0, 0.0, mode);
        for &k in &records {
            let t = k as f64 * schedule.dt;
            let mut c = start;
            h.evolve(&mut c, t);
            rec.push(t, &c, 0, 1)?;
        }
        return Ok(rec.finish());
    }

    let mut c = start;
    let mut next = records.iter().copied().peekable();
    for k in 0..=schedule.n_steps {
        if next.peek() == Some(&k) {
            next.next();
            rec.push(k as f64 * schedule.dt, &c, 0, 1)?;
        }
        if k == schedule.n_steps {
            break;
        }
        let xi1 = schedule.g_at(k) - schedule.g0;
        let xi2 = schedule.delta_at(k) - schedule.delta0;
        blocks.hamiltonian(xi1, xi2, mode).evolve(&mut c, schedule.dt);
    }
    Ok(rec.finish())
}

/// Bloch components of `ρ = I/2 + ρ_x σ_x + ρ_y σ_y + ρ_z σ_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub rho_x: f64,
    pub rho_y: f64,
    pub rho_z: f64,
}

impl BlochState {
    /// The system in `|n'⟩`.
    pub const INITIAL: BlochState = BlochState {
        rho_x: 0.0,
        rho_y: 0.0,
        rho_z: 0.5,
    };

    /// `⟨σ_z⟩ = 2ρ_z`.
    pub fn inversion(&self) -> f64 {
        2.0 * self.rho_z
    }

    pub fn length_sq(&self) -> f64 {
        self.rho_x * self.rho_x + self.rho_y * self.rho_y + self.rho_z * self.rho_z
    }
}

/// Generator `r' = M r` of the white-noise master equation
/// `ρ' = -i[H₀, ρ] - Σ_j (Q_j/2)[V_j, [V_j, ρ]]` in Bloch components.
pub fn bloch_generator(blocks: &TwoLevelBlocks, q1: f64, q2: f64) -> [[f64; 3]; 3] {
    let h = blocks.h0;
    let a = blocks.v1.a12;
    let b = 0.5 * (blocks.v1.a11 - blocks.v1.a22);
    let b2 = 0.5 * (blocks.v2[0] - blocks.v2[1]);
    let split = h.a11 - h.a22;
    let deph = 2.0 * q2 * b2 * b2;
    [
        [-2.0 * q1 * b * b - deph, -split, 2.0 * q1 * a * b],
        [split, -2.0 * q1 * (a * a + b * b) - deph, -2.0 * h.a12],
        [2.0 * q1 * a * b, 2.0 * h.a12, -2.0 * q1 * a * a],
    ]
}

/// Solve the Bloch equations from [`BlochState::INITIAL`] at the ascending `times` (≥ 0).
pub fn solve_master_equation(blocks: &TwoLevelBlocks, q1: f64, q2: f64, times: &[f64]) -> Result<Vec<BlochState>> {
    require(q1.is_finite() && q1 >= 0.0, "q1", q1, "must be non-negative")?;
    require(q2.is_finite() && q2 >= 0.0, "q2", q2, "must be non-negative")?;
    require(
        times.first().is_none_or(|&t| t >= 0.0),
        "times",
        times.first().copied().unwrap_or(0.0),
        "must start at t >= 0",
    )?;
    let m = bloch_generator(blocks, q1, q2);
    let rhs = |_: f64, r: &[f64; 3]| {
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = m[i][0] * r[0] + m[i][1] * r[1] + m[i][2] * r[2];
        }
        out
    };
    let init = BlochState::INITIAL;
    let sol = dopri5(
        rhs,
        0.0,
        [init.rho_x, init.rho_y, init.rho_z],
        times,
        Tolerance { rtol: 1e-9, atol: 1e-12 },
    )?;
    Ok(sol
        .into_iter()
        .map(|r| BlochState {
            rho_x: r[0],
            rho_y: r[1],
            rho_z: r[2],
        })
        .collect())
}

/// `⟨σ_z⟩ = e^{-Γt}[cosh(t√𝒟) + (Γ/√𝒟) sinh(t√𝒟)]`, `𝒟 = Γ² - 4ω²`.
pub fn analytic_overkerr(gamma: f64, omega_r: f64, t: f64) -> f64 {
    let d = gamma * gamma - 4.0 * omega_r * omega_r;
    if d.abs() * t * t < 1e-8 {
        // second-order series in t√𝒟 about the critical point
        let x2 = d * t * t;
        return (-gamma * t).exp() * (1.0 + 0.5 * x2 + gamma * t * (1.0 + x2 / 6.0));
    }
    if d > 0.0 {
        let s = d.sqrt();
        let slow = ((s - gamma) * t).exp();
        let fast = (-(s + gamma) * t).exp();
        0.5 * (slow + fast) + 0.5 * gamma / s * (slow - fast)
    } else {
        let s = (-d).sqrt();
        let (sn, cs) = (s * t).sin_cos();
        (-gamma * t).exp() * (cs + gamma / s * sn)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRate {
    pub gamma: f64,
    /// `𝒟 = Γ² - 4(ω^R)²`.
    pub discriminant: f64,
    pub omega_r: f64,
}

/// `Γ = Q₁g₀²(ε_n⁽²⁾ - ε_{n'}⁽²⁾)² + Q₂(n - n')²/4` with the exact correction difference at `delta0`.
pub fn decay_rate(params: &OscillatorParams, pair: ResonantPair, g0: f64, delta0: f64, q1: f64, q2: f64) -> Result<DecayRate> {
    let diff = second_order_correction(params, delta0, pair.upper)? - second_order_correction(params, delta0, pair.lower)?;
    let m = pair.order() as f64;
    let gamma = q1 * g0 * g0 * diff * diff + q2 * m * m / 4.0;
    let omega_r = rabi_frequency(params, delta0, g0, pair)?;
    Ok(DecayRate {
        gamma,
        discriminant: gamma * gamma - 4.0 * omega_r * omega_r,
        omega_r,
    })
}

/// Kerr case, white amplitude noise: `e^{-2Q₁V₁₂²t} cos(2H₁₂t)`.
pub fn analytic_kerr_white(v12: f64, h12: f64, q1: f64, t: f64) -> f64 {
    (-2.0 * q1 * v12 * v12 * t).exp() * (2.0 * h12 * t).cos()
}

/// `∫₀ᵗ∫₀ᵗ σ² e^{-|s-s'|/τ} ds ds' = 2σ²τ[t - τ(1 - e^{-t/τ})]`.
pub fn ou_double_integral(channel: &NoiseChannel, t: f64) -> f64 {
    let x = t / channel.tau;
    // x - 1 + e^{-x}, cancellation-free
    let bracket = if x < 1e-2 {
        x * x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0 - x * (1.0 / 120.0 - x / 720.0))))
    } else {
        x + (-x).exp_m1()
    };
    2.0 * channel.sigma * channel.sigma * channel.tau * channel.tau * bracket
}

/// Kerr case, exponentially correlated amplitude noise: `exp[-2V₁₂² ∬⟨ξξ'⟩] cos(2H₁₂t)`.
pub fn analytic_kerr_correlated(v12: f64, h12: f64, channel: &NoiseChannel, t: f64) -> f64 {
    (-2.0 * v12 * v12 * ou_double_integral(channel, t)).exp() * (2.0 * h12 * t).cos()
}
