//! Schrödinger propagation of the full rotating-frame model in a truncated Fock space.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{require, Error, Result};
use crate::linalg::{eigh_tridiagonal, SymTridiagonal, SymmetricEigen, TridiagonalSolver};
use crate::noise::NoisePath;
use crate::spectrum::{quasienergy_bare, OscillatorParams, ResonantPair};
#[allow(unused_imports)]
use num_traits::Float;

pub const NORM_GUARD: f64 = 1e-6;
pub const LEAK_GUARD: f64 = 1e-4;
pub const DEFAULT_CUTOFF: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    cutoff: usize,
}

impl FockSpace {
    pub fn new(cutoff: usize) -> Result<Self> {
        require(cutoff >= 2, "cutoff", cutoff as f64, "must be at least 2")?;
        Ok(Self { cutoff })
    }

    /// Highest retained Fock index.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }
}

impl Default for FockSpace {
    fn default() -> Self {
        Self { cutoff: DEFAULT_CUTOFF }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn fock(space: FockSpace, n: usize) -> Result<Self> {
        require(n <= space.cutoff(), "n", n as f64, "Fock index exceeds the cutoff")?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); space.dim()];
        amplitudes[n] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let s = Self { amplitudes };
        let norm = s.norm();
        require((norm - 1.0).abs() <= 1e-9, "norm", norm, "state must be normalized")?;
        Ok(s)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// `H = -Δ a†a + (α/2)(a†a)² + κ(a†a)³ + g(a + a†)` on `{|0⟩, …, |cutoff⟩}`.
pub fn build_hamiltonian(params: &OscillatorParams, g: f64, delta: f64, space: FockSpace) -> SymTridiagonal {
    let mut h = SymTridiagonal {
        diag: vec![0.0; space.dim()],
        off: vec![0.0; space.cutoff()],
    };
    fill_hamiltonian(&mut h, params, g, delta);
    h
}

fn fill_hamiltonian(h: &mut SymTridiagonal, params: &OscillatorParams, g: f64, delta: f64) {
    for (n, d) in h.diag.iter_mut().enumerate() {
        *d = quasienergy_bare(params, delta, n as u32);
    }
    for (n, o) in h.off.iter_mut().enumerate() {
        *o = g * ((n + 1) as f64).sqrt();
    }
}

/// Drive amplitude `g(t) = g₀ + ξ₁(t)` and detuning `Δ(t) = Δ₀ + ξ₂(t)` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSchedule {
    pub g0: f64,
    pub delta0: f64,
    pub amplitude_path: Option<NoisePath>,
    pub frequency_path: Option<NoisePath>,
    pub dt: f64,
    pub n_steps: usize,
}

impl DriveSchedule {
    pub fn new(g0: f64, delta0: f64, dt: f64, n_steps: usize) -> Result<Self> {
        require(g0.is_finite(), "g0", g0, "must be finite")?;
        require(delta0.is_finite(), "delta0", delta0, "must be finite")?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidStep { dt });
        }
        require(n_steps >= 1, "n_steps", n_steps as f64, "must be at least 1")?;
        Ok(Self {
            g0,
            delta0,
            amplitude_path: None,
            frequency_path: None,
            dt,
            n_steps,
        })
    }

    fn check_path(&self, path: &NoisePath) -> Result<()> {
        require(path.len() == self.n_steps, "path length", path.len() as f64, "must equal n_steps")?;
        require(path.dt == self.dt, "path dt", path.dt, "must equal the schedule step")?;
        require(path.values.iter().all(|x| x.is_finite()), "path", f64::NAN, "values must be finite")
    }

    pub fn with_amplitude_path(mut self, path: NoisePath) -> Result<Self> {
        self.check_path(&path)?;
        self.amplitude_path = Some(path);
        Ok(self)
    }

    pub fn with_frequency_path(mut self, path: NoisePath) -> Result<Self> {
        self.check_path(&path)?;
        self.frequency_path = Some(path);
        Ok(self)
    }

    pub fn is_noisy(&self) -> bool {
        let active = |p: &Option<NoisePath>| p.as_ref().is_some_and(|p| p.values.iter().any(|&x| x != 0.0));
        active(&self.amplitude_path) || active(&self.frequency_path)
    }

    /// Drive amplitude held during step `k`.
    pub fn g_at(&self, k: usize) -> f64 {
        self.g0 + self.amplitude_path.as_ref().map_or(0.0, |p| p.values[k])
    }

    /// Detuning held during step `k`.
    pub fn delta_at(&self, k: usize) -> f64 {
        self.delta0 + self.frequency_path.as_ref().map_or(0.0, |p| p.values[k])
    }

    pub fn t_end(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    /// Step indices at which the state is recorded: `0, s, 2s, …` and always `n_steps`.
    pub fn record_steps(&self, stride: usize) -> Vec<usize> {
        let stride = stride.max(1);
        let mut steps: Vec<usize> = (0..=self.n_steps).step_by(stride).collect();
        if *steps.last().unwrap() != self.n_steps {
            steps.push(self.n_steps);
        }
        steps
    }
}

/// `min(1000, max(1, n_steps / 2000))`: at least ~2000 recorded points.
pub fn default_stride(n_steps: usize) -> usize {
    (n_steps / 2000).clamp(1, 1000)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PropagationOptions {
    /// Steps between recorded points; `None` selects [`default_stride`].
    pub stride: Option<usize>,
    pub record_populations: bool,
    /// Top-two-level population that raises `CutoffLeak`; `None` selects [`LEAK_GUARD`].
    pub leak_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionTrace {
    pub times: Vec<f64>,
    /// `P_{n'} - P_n` at each recorded time.
    pub inversion: Vec<f64>,
    /// `populations[i][k] = P_k(times[i])` when requested.
    pub populations: Option<Vec<Vec<f64>>>,
    /// Largest `| |ψ| - 1 |` seen at recorded points.
    pub max_norm_drift: f64,
    /// Largest population of the top two Fock levels seen at any step.
    pub max_cutoff_leak: f64,
}

pub(crate) struct Recorder {
    pub times: Vec<f64>,
    pub inversion: Vec<f64>,
    pub populations: Option<Vec<Vec<f64>>>,
    pub max_norm_drift: f64,
    pub max_cutoff_leak: f64,
}

impl Recorder {
    pub fn new(capacity: usize, with_populations: bool) -> Self {
        Self {
            times: Vec::with_capacity(capacity),
            inversion: Vec::with_capacity(capacity),
            populations: with_populations.then(|| Vec::with_capacity(capacity)),
            max_norm_drift: 0.0,
            max_cutoff_leak: 0.0,
        }
    }

    /// Record `psi` at time `t` with inversion `P[lower] - P[upper]`.
    pub fn push(&mut self, t: f64, psi: &[Complex64], lower: usize, upper: usize) -> Result<()> {
        let norm_sq: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        let drift = (norm_sq.sqrt() - 1.0).abs();
        if drift > NORM_GUARD || !drift.is_finite() {
            return Err(Error::NormDrift { time: t, deviation: drift });
        }
        self.max_norm_drift = self.max_norm_drift.max(drift);
        self.times.push(t);
        self.inversion.push(psi[lower].norm_sqr() - psi[upper].norm_sqr());
        if let Some(p) = self.populations.as_mut() {
            p.push(psi.iter().map(|c| c.norm_sqr()).collect());
        }
        Ok(())
    }

    pub fn finish(self) -> InversionTrace {
        InversionTrace {
            times: self.times,
            inversion: self.inversion,
            populations: self.populations,
            max_norm_drift: self.max_norm_drift,
            max_cutoff_leak: self.max_cutoff_leak,
        }
    }
}

fn check_leak(psi: &[Complex64], t: f64, threshold: f64, worst: &mut f64) -> Result<()> {
    let n = psi.len();
    let top = psi[n - 1].norm_sqr() + psi[n - 2].norm_sqr();
    *worst = worst.max(top);
    if top > threshold {
        return Err(Error::CutoffLeak { time: t, population: top });
    }
    Ok(())
}

/// Propagate `psi0` under the piecewise-constant schedule with exact per-step
/// exponentials. Noise-free schedules reuse one eigendecomposition and
/// evaluate each recorded time directly from the spectrum.
pub fn propagate(
    schedule: &DriveSchedule,
    params: &OscillatorParams,
    space: FockSpace,
    pair: ResonantPair,
    psi0: &StateVector,
    options: PropagationOptions,
) -> Result<InversionTrace> {
    require(
        psi0.amplitudes.len() == space.dim(),
        "psi0",
        psi0.amplitudes.len() as f64,
        "length must equal the space dimension",
    )?;
    let norm = psi0.norm();
    require((norm - 1.0).abs() <= 1e-9, "psi0", norm, "must be normalized")?;
    require(
        (pair.upper as usize) <= space.cutoff(),
        "pair.upper",
        pair.upper as f64,
        "exceeds the cutoff",
    )?;
    let (lower, upper) = (pair.lower as usize, pair.upper as usize);
    let stride = options.stride.unwrap_or_else(|| default_stride(schedule.n_steps));
    let records = schedule.record_steps(stride);
    let threshold = options.leak_threshold.unwrap_or(LEAK_GUARD);
    require(threshold > 0.0, "leak_threshold", threshold, "must be positive")?;
    let mut rec = Recorder::new(records.len(), options.record_populations);
    let mut leak = 0.0;
    let mut scratch = Vec::with_capacity(space.dim());

    if !schedule.is_noisy() {
        let eig = eigh_tridiagonal(&build_hamiltonian(params, schedule.g0, schedule.delta0, space));
        let mut psi = psi0.amplitudes.clone();
        for &k in &records {
            let t = k as f64 * schedule.dt;
            psi.copy_from_slice(&psi0.amplitudes);
            eig.evolve(&mut psi, t, &mut scratch);
            check_leak(&psi, t, threshold, &mut leak)?;
            rec.push(t, &psi, lower, upper)?;
        }
        rec.max_cutoff_leak = leak;
        return Ok(rec.finish());
    }

    let mut h = build_hamiltonian(params, schedule.g0, schedule.delta0, space);
    let mut solver = TridiagonalSolver::new(space.dim());
    let mut eig = SymmetricEigen {
        values: Vec::new(),
        vectors: Vec::new(),
    };
    let mut psi = psi0.amplitudes.clone();
    let mut next = records.iter().copied().peekable();
    for k in 0..=schedule.n_steps {
        let t = k as f64 * schedule.dt;
        if next.peek() == Some(&k) {
            next.next();
            rec.push(t, &psi, lower, upper)?;
        }
        if k == schedule.n_steps {
            break;
        }
        fill_hamiltonian(&mut h, params, schedule.g_at(k), schedule.delta_at(k));
        solver.solve_into(&h, &mut eig);
        eig.evolve(&mut psi, schedule.dt, &mut scratch);
        check_leak(&psi, t + schedule.dt, threshold, &mut leak)?;
    }
    rec.max_cutoff_leak = leak;
    Ok(rec.finish())
}
