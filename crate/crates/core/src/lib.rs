//! Multi-photon Rabi oscillations of a driven Kerr / over-Kerr oscillator
//! subject to classical fluctuations of the drive amplitude and frequency.
//!
//! The crate is `no_std` (with `alloc`) and contains only numerics:
//!
//! * [`spectrum`]: quasienergies, perturbative corrections, Rabi frequencies, resonances
//! * [`noise`]: seeded Ornstein–Uhlenbeck paths and estimators
//! * [`dynamics`]: truncated-Fock Schrödinger propagation of the full model
//! * [`twolevel`]: the effective two-level model, its master equation and closed forms
//! * [`analysis`]: regime classification and applicability bounds
//!
//! Energies are measured in units of the Kerr constant α and times in 1/α.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod noise;
pub mod ode;
pub mod optimize;
pub mod spectrum;
pub mod twolevel;

pub use analysis::{
    applicability_min_tau, escape_probability, overdamp_g_upper_bound, overdamped_ratio, rabi_period_lower_bound, EscapeEstimate, Regime,
    RegimeReport,
};
pub use dynamics::{build_hamiltonian, propagate, DriveSchedule, FockSpace, InversionTrace, PropagationOptions, StateVector};
pub use error::{Error, Result};
pub use noise::{sample_path, white_noise_intensity, NoiseChannel, NoisePath, NoiseTarget};
pub use spectrum::{OscillatorParams, ResonantPair};
pub use twolevel::{BlochState, EffectiveMode, TwoLevelBlocks};
