//! The seven reference parameter sets (amplitude noise only, η = 0.1).

use std::path::PathBuf;

use kerr_rabi_core::dynamics::LEAK_GUARD;
use kerr_rabi_core::noise::{NoiseChannel, NoiseTarget};
use kerr_rabi_core::spectrum::{OscillatorParams, ResonantPair};
use kerr_rabi_core::twolevel::EffectiveMode;
use kerr_rabi_core::FockSpace;

use crate::config::{DetuningSpec, ExperimentConfig, Models, StepSpec};

/// Relative amplitude-noise strength `σ/g₀` used by every row.
pub const ETA: f64 = 0.1;

/// Two nominal Rabi periods.
pub const T_END: f64 = 60_000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub row: usize,
    pub nprime: u32,
    pub n: u32,
    pub kappa: f64,
    pub g: f64,
    pub tau: f64,
    pub delta_full: f64,
    pub delta_two_level: f64,
}

impl Table1Row {
    pub fn params(&self) -> OscillatorParams {
        OscillatorParams::with_kappa(self.kappa).expect("table parameters are valid")
    }

    pub fn pair(&self) -> ResonantPair {
        ResonantPair::new(self.n, self.nprime).expect("table pairs are valid")
    }

    pub fn channel(&self) -> NoiseChannel {
        NoiseChannel::new(ETA * self.g, self.tau, NoiseTarget::Amplitude).expect("table noise is valid")
    }
}

const fn row(row: usize, n: u32, kappa: f64, g: f64, tau: f64, delta_full: f64, delta_two_level: f64) -> Table1Row {
    Table1Row {
        row,
        nprime: 0,
        n,
        kappa,
        g,
        tau,
        delta_full,
        delta_two_level,
    }
}

pub const TABLE1: [Table1Row; 7] = [
    row(1, 3, 0.0, 0.034966, 2000.0, 1.5, 1.5),
    row(2, 3, -0.025, 0.029492, 2000.0, 1.274905, 1.274905),
    row(3, 4, 0.0, 0.099034, 2000.0, 2.0, 2.0),
    row(4, 4, -0.025, 0.075692, 2000.0, 1.599393, 1.599395),
    row(5, 5, 0.0, 0.202931, 1000.0, 2.5, 2.5),
    row(6, 5, -0.025, 0.138884, 100.0, 1.872625, 1.872634),
    row(7, 5, 0.025, 0.261639, 1000.0, 3.125676, 3.125674),
];

pub fn table1_row(r: usize) -> Option<Table1Row> {
    TABLE1.get(r.checked_sub(1)?).copied()
}

/// Experiment for a table row: the table's detunings, initial state `|n'⟩`, cutoff 11.
pub fn preset_table1(r: usize) -> Option<ExperimentConfig> {
    let t = table1_row(r)?;
    Some(ExperimentConfig {
        oscillator: t.params(),
        pair: t.pair(),
        g0: t.g,
        detuning: DetuningSpec::Fixed {
            full: t.delta_full,
            effective: t.delta_two_level,
        },
        noise: vec![t.channel()],
        space: FockSpace::default(),
        leak_guard: LEAK_GUARD,
        t_end: T_END,
        dt: StepSpec::Auto,
        points: 2000,
        realizations: 1000,
        seed: 0,
        models: Models {
            full: true,
            effective: true,
            ..Models::default()
        },
        effective_mode: EffectiveMode::FullEffective,
        output_dir: PathBuf::from(format!("out/table1_row{r}")),
        write_traces: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows() {
        let r5 = preset_table1(5).unwrap();
        assert_eq!(r5.g0, 0.202931);
        assert_eq!(r5.noise[0].tau, 1000.0);
        assert_eq!(r5.detuning, DetuningSpec::Fixed { full: 2.5, effective: 2.5 });
        let r7 = table1_row(7).unwrap();
        assert_eq!((r7.kappa, r7.delta_full), (0.025, 3.125676));
        assert_eq!(table1_row(1).unwrap().kappa, 0.0);
        assert!(preset_table1(0).is_none() && preset_table1(8).is_none());
        assert_eq!(preset_table1(6).unwrap().space.cutoff(), 11);
    }
}
