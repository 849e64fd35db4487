//! Seeded parallel ensembles and their CSV artifacts.

use std::fmt::Write as _;
use std::path::Path;

use kerr_rabi_core::dynamics::{propagate, DriveSchedule, PropagationOptions, StateVector};
use kerr_rabi_core::noise::{sample_path, subseed, white_noise_intensity, NoiseTarget, GENERATOR};
use kerr_rabi_core::spectrum::{refine_resonance_full, refine_resonance_two_level, resonant_detuning_bare};
use kerr_rabi_core::twolevel::{
    analytic_kerr_correlated, analytic_overkerr, build_blocks, decay_rate, propagate_effective, solve_master_equation, TwoLevelBlocks,
};
use rayon::prelude::*;

use crate::config::{AutoResonance, DetuningSpec, ExperimentConfig, StepSpec};
use crate::error::{AppError, ConfigError};
use crate::output::{csv, fmt_f64, trace_csv, write_or_print};

pub const THREADS_ENV: &str = "KERR_RABI_THREADS";

/// Values derived from the config before any trajectory runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub delta_full: f64,
    pub delta_effective: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelStats {
    pub mean: Vec<f64>,
    /// Standard error of the mean; zero for a single realization.
    pub se: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub config: ExperimentConfig,
    pub resolved: Resolved,
    pub times: Vec<f64>,
    pub full: Option<ModelStats>,
    pub effective: Option<ModelStats>,
    pub master: Option<Vec<f64>>,
    pub analytic: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker cap; `None` reads `KERR_RABI_THREADS`, then falls back to rayon's default.
    pub threads: Option<usize>,
    pub dump_noise: bool,
}

pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

fn config_error(key: &str, message: impl Into<String>) -> AppError {
    AppError::Config(ConfigError::Value {
        key: key.to_string(),
        message: message.into(),
    })
}

pub fn resolve(config: &ExperimentConfig) -> Result<Resolved, AppError> {
    let (p, pair, g0) = (&config.oscillator, config.pair, config.g0);
    let (delta_full, delta_effective) = match config.detuning {
        DetuningSpec::Fixed { full, effective } => (full, effective),
        DetuningSpec::Auto(AutoResonance::Bare) => {
            let d = resonant_detuning_bare(p, pair);
            (d, d)
        }
        DetuningSpec::Auto(AutoResonance::TwoLevel) => {
            let d = refine_resonance_two_level(p, pair, g0)?;
            (d, d)
        }
        DetuningSpec::Auto(AutoResonance::Full) => (
            refine_resonance_full(p, pair, g0, config.space)?.detuning,
            refine_resonance_two_level(p, pair, g0)?,
        ),
    };

    let tau_min = config
        .noise
        .iter()
        .filter(|c| c.is_enabled())
        .map(|c| c.tau)
        .fold(f64::INFINITY, f64::min);
    let noisy = tau_min.is_finite();
    let grid_dt = config.t_end / config.points as f64;
    let target = match config.dt {
        StepSpec::Fixed(dt) => {
            if noisy && dt > tau_min / 20.0 {
                return Err(config_error("time.dt", format!("must not exceed min(tau)/20 = {}", tau_min / 20.0)));
            }
            dt
        }
        StepSpec::Auto if noisy => (tau_min / 20.0).min(grid_dt),
        StepSpec::Auto => grid_dt,
    };
    let n_steps = ((config.t_end / target) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let dt = config.t_end / n_steps as f64;
    let stride = (n_steps / config.points).clamp(1, 1000);
    Ok(Resolved {
        delta_full,
        delta_effective,
        dt,
        n_steps,
        stride,
    })
}

fn schedule(config: &ExperimentConfig, r: &Resolved, delta0: f64, trajectory: u64) -> Result<DriveSchedule, AppError> {
    let mut s = DriveSchedule::new(config.g0, delta0, r.dt, r.n_steps)?;
    for c in config.noise.iter().filter(|c| c.is_enabled()) {
        let path = sample_path(c, r.dt, r.n_steps, subseed(config.seed, trajectory, c.target.index()))?;
        s = match c.target {
            NoiseTarget::Amplitude => s.with_amplitude_path(path)?,
            NoiseTarget::Frequency => s.with_frequency_path(path)?,
        };
    }
    Ok(s)
}

type TrajectoryOutput = (Option<Vec<f64>>, Option<Vec<f64>>);

struct Runner<'a> {
    config: &'a ExperimentConfig,
    resolved: Resolved,
    blocks: Option<TwoLevelBlocks>,
    psi0: StateVector,
}

impl Runner<'_> {
    fn options(&self, record_populations: bool) -> PropagationOptions {
        PropagationOptions {
            stride: Some(self.resolved.stride),
            record_populations,
            leak_threshold: Some(self.config.leak_guard),
        }
    }

    fn full(&self, trajectory: u64, populations: bool) -> Result<kerr_rabi_core::InversionTrace, AppError> {
        let s = schedule(self.config, &self.resolved, self.resolved.delta_full, trajectory)?;
        Ok(propagate(
            &s,
            &self.config.oscillator,
            self.config.space,
            self.config.pair,
            &self.psi0,
            self.options(populations),
        )?)
    }

    fn effective(&self, trajectory: u64, populations: bool) -> Result<kerr_rabi_core::InversionTrace, AppError> {
        let blocks = self.blocks.as_ref().expect("blocks built when the effective model is requested");
        let s = schedule(self.config, &self.resolved, self.resolved.delta_effective, trajectory)?;
        Ok(propagate_effective(
            blocks,
            &s,
            self.config.effective_mode,
            self.options(populations),
        )?)
    }

    fn trajectory(&self, i: u64) -> Result<TrajectoryOutput, AppError> {
        let m = self.config.models;
        let full = if m.full { Some(self.full(i, false)?.inversion) } else { None };
        let eff = if m.effective {
            Some(self.effective(i, false)?.inversion)
        } else {
            None
        };
        Ok((full, eff))
    }
}

/// Pointwise mean and standard error over traces, summed in trace order.
pub fn reduce(traces: &[&[f64]]) -> ModelStats {
    let n = traces.len();
    let len = traces.first().map_or(0, |t| t.len());
    let mut mean = vec![0.0; len];
    for t in traces {
        for (m, x) in mean.iter_mut().zip(t.iter()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut se = vec![0.0; len];
    if n > 1 {
        for t in traces {
            for ((s, x), m) in se.iter_mut().zip(t.iter()).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        let nf = n as f64;
        se.iter_mut().for_each(|s| *s = (*s / (nf - 1.0)).sqrt() / nf.sqrt());
    }
    ModelStats { mean, se }
}

/// Number of swings from above `+threshold` to below `-threshold` or back.
pub fn significant_sign_changes(values: &[f64], threshold: f64) -> usize {
    let mut state = 0i8;
    let mut changes = 0;
    for &v in values {
        let s = if v > threshold {
            1
        } else if v < -threshold {
            -1
        } else {
            0
        };
        if s != 0 {
            if state != 0 && s != state {
                changes += 1;
            }
            state = s;
        }
    }
    changes
}

fn analytic_curve(config: &ExperimentConfig, blocks: &TwoLevelBlocks, delta: f64, times: &[f64]) -> Result<Vec<f64>, AppError> {
    let amp = config.channel(NoiseTarget::Amplitude).copied();
    let freq = config.channel(NoiseTarget::Frequency).filter(|c| c.is_enabled());
    let (v12, h12) = (blocks.v1.a12, blocks.h0.a12);
    if config.oscillator.is_kerr() && freq.is_none() {
        return Ok(times
            .iter()
            .map(|&t| match amp {
                Some(c) => analytic_kerr_correlated(v12, h12, &c, t),
                None => (2.0 * h12 * t).cos(),
            })
            .collect());
    }
    let q1 = amp.map_or(0.0, |c| white_noise_intensity(&c));
    let q2 = freq.map_or(0.0, white_noise_intensity);
    let rate = decay_rate(&config.oscillator, config.pair, config.g0, delta, q1, q2)?;
    Ok(times.iter().map(|&t| analytic_overkerr(rate.gamma, rate.omega_r, t)).collect())
}

/// Run every requested model; no files are written.
pub fn compute(config: &ExperimentConfig, threads: Option<usize>) -> Result<EnsembleResult, AppError> {
    let resolved = resolve(config)?;
    let m = config.models;
    let blocks = if m.effective || m.master || m.analytic {
        Some(build_blocks(&config.oscillator, config.pair, config.g0, resolved.delta_effective)?)
    } else {
        None
    };
    let runner = Runner {
        config,
        resolved,
        blocks,
        psi0: StateVector::fock(config.space, config.pair.lower as usize)?,
    };
    let probe = DriveSchedule::new(config.g0, resolved.delta_full, resolved.dt, resolved.n_steps)?;
    let times: Vec<f64> = probe
        .record_steps(resolved.stride)
        .iter()
        .map(|&k| k as f64 * resolved.dt)
        .collect();

    let noisy = config.noise.iter().any(|c| c.is_enabled());
    let mut full = None;
    let mut effective = None;
    if m.full || m.effective {
        let runs = if noisy { config.realizations } else { 1 };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.or_else(threads_from_env).unwrap_or(0))
            .build()
            .map_err(|e| AppError::Pool(e.to_string()))?;
        let outputs: Vec<TrajectoryOutput> = pool.install(|| {
            (0..runs as u64)
                .into_par_iter()
                .map(|i| runner.trajectory(i))
                .collect::<Result<_, _>>()
        })?;
        let stats = |pick: fn(&TrajectoryOutput) -> Option<&Vec<f64>>| -> Option<ModelStats> {
            let traces: Vec<&[f64]> = outputs.iter().filter_map(|o| pick(o).map(Vec::as_slice)).collect();
            (!traces.is_empty()).then(|| reduce(&traces))
        };
        full = stats(|o| o.0.as_ref());
        effective = stats(|o| o.1.as_ref());
    }

    let (mut master, mut analytic) = (None, None);
    if let Some(b) = runner.blocks.as_ref() {
        let q = |t: NoiseTarget| config.channel(t).map_or(0.0, white_noise_intensity);
        if m.master {
            let sol = solve_master_equation(b, q(NoiseTarget::Amplitude), q(NoiseTarget::Frequency), &times)?;
            master = Some(sol.iter().map(|s| s.inversion()).collect());
        }
        if m.analytic {
            analytic = Some(analytic_curve(config, b, resolved.delta_effective, &times)?);
        }
    }

    Ok(EnsembleResult {
        config: config.clone(),
        resolved,
        times,
        full,
        effective,
        master,
        analytic,
    })
}

/// `result.csv` body.
pub fn result_csv(r: &EnsembleResult) -> String {
    let mut header = vec!["t"];
    let mut columns: Vec<&[f64]> = vec![&r.times];
    if let Some(s) = &r.full {
        header.extend(["mean_full", "se_full"]);
        columns.extend([s.mean.as_slice(), s.se.as_slice()]);
    }
    if let Some(s) = &r.effective {
        header.extend(["mean_eff", "se_eff"]);
        columns.extend([s.mean.as_slice(), s.se.as_slice()]);
    }
    if let Some(v) = &r.master {
        header.push("mean_master");
        columns.push(v);
    }
    if let Some(v) = &r.analytic {
        header.push("mean_analytic");
        columns.push(v);
    }
    csv(&header, &columns, fmt_f64)
}

/// Re-runnable config with resolved detunings, followed by `meta.*` provenance.
pub fn manifest(r: &EnsembleResult) -> String {
    let mut resolved = r.config.clone();
    resolved.detuning = DetuningSpec::Fixed {
        full: r.resolved.delta_full,
        effective: r.resolved.delta_effective,
    };
    let mut s = resolved.to_text();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "meta.{k} = {v}");
    };
    kv("version", env!("CARGO_PKG_VERSION").to_string());
    kv("generator", GENERATOR.to_string());
    kv(
        "seed_rule",
        "splitmix64(splitmix64(splitmix64(seed) ^ trajectory) ^ channel * 0xD6E8FEB86659FD93); channel 0 = amplitude, 1 = frequency"
            .to_string(),
    );
    if let DetuningSpec::Auto(a) = r.config.detuning {
        kv("auto_resonance", a.as_str().to_string());
    }
    kv("dt", fmt_f64(r.resolved.dt));
    kv("n_steps", r.resolved.n_steps.to_string());
    kv("stride", r.resolved.stride.to_string());
    kv("initial_state", r.config.pair.lower.to_string());
    for c in r.config.noise.iter().filter(|c| c.is_enabled()) {
        kv(
            &format!("subseed.trajectory0.channel{}", c.target.index()),
            subseed(r.config.seed, 0, c.target.index()).to_string(),
        );
    }
    s
}

fn noise_csv(config: &ExperimentConfig, r: &Resolved) -> Result<String, AppError> {
    let s = schedule(config, r, r.delta_full, 0)?;
    let times: Vec<f64> = (0..r.n_steps).map(|k| k as f64 * r.dt).collect();
    let xi = |p: &Option<kerr_rabi_core::NoisePath>| p.as_ref().map_or_else(|| vec![0.0; r.n_steps], |p| p.values.clone());
    let (x1, x2) = (xi(&s.amplitude_path), xi(&s.frequency_path));
    Ok(csv(&["t", "xi1", "xi2"], &[&times, &x1, &x2], fmt_f64))
}

/// Compute the ensemble and write `result.csv` and `manifest.txt` (plus optional traces and noise dump).
pub fn run_experiment(config: &ExperimentConfig, options: RunOptions) -> Result<EnsembleResult, AppError> {
    let result = compute(config, options.threads)?;
    let dir = config.output_dir.as_path();
    std::fs::create_dir_all(dir)?;
    write_or_print(Some(&dir.join("result.csv")), &result_csv(&result))?;
    write_or_print(Some(&dir.join("manifest.txt")), &manifest(&result))?;
    if options.dump_noise {
        write_or_print(Some(&dir.join("noise.csv")), &noise_csv(config, &result.resolved)?)?;
    }
    if config.write_traces {
        write_traces(config, &result, dir)?;
    }
    Ok(result)
}

fn write_traces(config: &ExperimentConfig, result: &EnsembleResult, dir: &Path) -> Result<(), AppError> {
    let blocks = if config.models.effective {
        Some(build_blocks(
            &config.oscillator,
            config.pair,
            config.g0,
            result.resolved.delta_effective,
        )?)
    } else {
        None
    };
    let runner = Runner {
        config,
        resolved: result.resolved,
        blocks,
        psi0: StateVector::fock(config.space, config.pair.lower as usize)?,
    };
    if config.models.full {
        let t = runner.full(0, true)?;
        write_or_print(
            Some(&dir.join("trace_full.csv")),
            &trace_csv(&t.times, &t.inversion, t.populations.as_deref()),
        )?;
    }
    if config.models.effective {
        let t = runner.effective(0, false)?;
        write_or_print(Some(&dir.join("trace_effective.csv")), &trace_csv(&t.times, &t.inversion, None))?;
    }
    Ok(())
}
