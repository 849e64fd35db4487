//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # row 6 of the reference table
//! oscillator.kappa = -0.025
//! pair.n = 5
//! pair.nprime = 0
//! drive.g0 = 0.138884
//! drive.auto_resonance = full
//! noise.amplitude.sigma = 0.0138884
//! noise.amplitude.tau = 100
//! time.t_end = 60000
//! run.realizations = 1000
//! run.models = full,effective
//! ```
//!
//! Keys under `meta.` are ignored so that a run manifest can be read back as a config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use kerr_rabi_core::noise::{NoiseChannel, NoiseTarget};
use kerr_rabi_core::spectrum::{OscillatorParams, ResonantPair};
use kerr_rabi_core::twolevel::EffectiveMode;
use kerr_rabi_core::FockSpace;

use crate::error::ConfigError;
use crate::output::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AutoResonance {
    Bare,
    TwoLevel,
    /// Full model at its transfer optimum, effective model at the two-level root.
    Full,
}

impl AutoResonance {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "bare" => Some(Self::Bare),
            "two_level" => Some(Self::TwoLevel),
            "full" => Some(Self::Full),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bare => "bare",
            Self::TwoLevel => "two_level",
            Self::Full => "full",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetuningSpec {
    Fixed { full: f64, effective: f64 },
    Auto(AutoResonance),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSpec {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Models {
    pub full: bool,
    pub effective: bool,
    pub master: bool,
    pub analytic: bool,
}

impl Models {
    pub fn parse(s: &str) -> Option<Self> {
        let mut m = Models::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "full" => m.full = true,
                "effective" => m.effective = true,
                "master" => m.master = true,
                "analytic" => m.analytic = true,
                _ => return None,
            }
        }
        (m != Models::default()).then_some(m)
    }

    pub fn to_list(self) -> String {
        let names = [
            (self.full, "full"),
            (self.effective, "effective"),
            (self.master, "master"),
            (self.analytic, "analytic"),
        ];
        names.iter().filter(|(on, _)| *on).map(|(_, n)| *n).collect::<Vec<_>>().join(",")
    }
}

fn mode_name(mode: EffectiveMode) -> &'static str {
    match mode {
        EffectiveMode::FullEffective => "full_effective",
        EffectiveMode::Linearized => "linearized",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub oscillator: OscillatorParams,
    pub pair: ResonantPair,
    pub g0: f64,
    pub detuning: DetuningSpec,
    pub noise: Vec<NoiseChannel>,
    pub space: FockSpace,
    /// Top-two-level population that aborts a full-model trajectory; infinite disables the guard.
    pub leak_guard: f64,
    pub t_end: f64,
    pub dt: StepSpec,
    /// Target number of recorded points.
    pub points: usize,
    pub realizations: usize,
    pub seed: u64,
    pub models: Models,
    pub effective_mode: EffectiveMode,
    pub output_dir: PathBuf,
    /// Also write per-model traces of realization 0.
    pub write_traces: bool,
}

impl ExperimentConfig {
    pub fn channel(&self, target: NoiseTarget) -> Option<&NoiseChannel> {
        self.noise.iter().find(|c| c.target == target)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        text.parse()
    }

    /// Serialize to the config format; every value round-trips exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("oscillator.alpha", fmt_f64(self.oscillator.alpha));
        kv("oscillator.kappa", fmt_f64(self.oscillator.kappa));
        kv("pair.n", self.pair.upper.to_string());
        kv("pair.nprime", self.pair.lower.to_string());
        kv("drive.g0", fmt_f64(self.g0));
        match self.detuning {
            DetuningSpec::Fixed { full, effective } => {
                kv("drive.delta0", fmt_f64(full));
                kv("drive.delta0_effective", fmt_f64(effective));
            }
            DetuningSpec::Auto(a) => kv("drive.auto_resonance", a.as_str().to_string()),
        }
        for c in &self.noise {
            let name = match c.target {
                NoiseTarget::Amplitude => "amplitude",
                NoiseTarget::Frequency => "frequency",
            };
            kv(&format!("noise.{name}.sigma"), fmt_f64(c.sigma));
            kv(&format!("noise.{name}.tau"), fmt_f64(c.tau));
        }
        kv("space.cutoff", self.space.cutoff().to_string());
        kv("space.leak_guard", format_leak_guard(self.leak_guard));
        kv("time.t_end", fmt_f64(self.t_end));
        kv(
            "time.dt",
            match self.dt {
                StepSpec::Auto => "auto".to_string(),
                StepSpec::Fixed(dt) => fmt_f64(dt),
            },
        );
        kv("time.points", self.points.to_string());
        kv("run.realizations", self.realizations.to_string());
        kv("run.seed", self.seed.to_string());
        kv("run.models", self.models.to_list());
        kv("run.effective_mode", mode_name(self.effective_mode).to_string());
        kv("output.dir", self.output_dir.display().to_string());
        kv("output.traces", self.write_traces.to_string());
        s
    }
}

const KEYS: &[&str] = &[
    "oscillator.alpha",
    "oscillator.kappa",
    "pair.n",
    "pair.nprime",
    "drive.g0",
    "drive.delta0",
    "drive.delta0_effective",
    "drive.auto_resonance",
    "noise.amplitude.sigma",
    "noise.amplitude.tau",
    "noise.frequency.sigma",
    "noise.frequency.tau",
    "space.cutoff",
    "space.leak_guard",
    "time.t_end",
    "time.dt",
    "time.points",
    "run.realizations",
    "run.seed",
    "run.models",
    "run.effective_mode",
    "output.dir",
    "output.traces",
];

struct Table(BTreeMap<String, String>);

impl Table {
    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn value<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| ConfigError::Value {
                    key: key.to_string(),
                    message: format!("cannot parse `{v}`"),
                })
            })
            .transpose()
    }

    fn required<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        self.value(key)?.ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    fn finite(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.value::<f64>(key)? {
            Some(x) if !x.is_finite() => Err(ConfigError::Value {
                key: key.to_string(),
                message: "must be finite".to_string(),
            }),
            other => Ok(other),
        }
    }
}

pub fn format_leak_guard(x: f64) -> String {
    if x.is_infinite() {
        "off".to_string()
    } else {
        fmt_f64(x)
    }
}

/// `off` or a positive population.
pub fn parse_leak_guard(s: &str) -> Option<f64> {
    match s.trim() {
        "off" => Some(f64::INFINITY),
        v => v.parse::<f64>().ok().filter(|x| *x > 0.0 && x.is_finite()),
    }
}

fn invalid(key: &str, e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: e.to_string(),
    }
}

impl std::str::FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax {
                line: i + 1,
                message: "expected `key = value`".to_string(),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.starts_with("meta.") {
                continue;
            }
            if !KEYS.contains(&k) {
                return Err(ConfigError::UnknownKey(k.to_string()));
            }
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(ConfigError::Duplicate(k.to_string()));
            }
        }
        let t = Table(map);

        let alpha = t.finite("oscillator.alpha")?.unwrap_or(1.0);
        let kappa = t.finite("oscillator.kappa")?.unwrap_or(0.0);
        let oscillator = OscillatorParams::new(alpha, kappa).map_err(|e| invalid("oscillator", e))?;
        let n: u32 = t.required("pair.n")?;
        let nprime: u32 = t.value("pair.nprime")?.unwrap_or(0);
        let pair = ResonantPair::new(n, nprime).map_err(|e| invalid("pair", e))?;
        let g0 = t.finite("drive.g0")?.ok_or_else(|| ConfigError::Missing("drive.g0".to_string()))?;

        let detuning = match (t.finite("drive.delta0")?, t.get("drive.auto_resonance")) {
            (Some(_), Some(_)) => {
                return Err(invalid("drive.auto_resonance", "set either drive.delta0 or drive.auto_resonance"));
            }
            (Some(full), None) => DetuningSpec::Fixed {
                full,
                effective: t.finite("drive.delta0_effective")?.unwrap_or(full),
            },
            (None, Some(a)) => {
                if t.get("drive.delta0_effective").is_some() {
                    return Err(invalid("drive.delta0_effective", "requires drive.delta0"));
                }
                DetuningSpec::Auto(
                    AutoResonance::parse(a).ok_or_else(|| invalid("drive.auto_resonance", "expected bare, two_level or full"))?,
                )
            }
            (None, None) => return Err(ConfigError::Missing("drive.delta0 or drive.auto_resonance".to_string())),
        };

        let mut noise = Vec::new();
        for (name, target) in [("amplitude", NoiseTarget::Amplitude), ("frequency", NoiseTarget::Frequency)] {
            let sk = format!("noise.{name}.sigma");
            let tk = format!("noise.{name}.tau");
            match (t.finite(&sk)?, t.finite(&tk)?) {
                (Some(sigma), Some(tau)) => noise.push(NoiseChannel::new(sigma, tau, target).map_err(|e| invalid(&sk, e))?),
                (None, None) => {}
                (Some(_), None) => return Err(ConfigError::Missing(tk)),
                (None, Some(_)) => return Err(ConfigError::Missing(sk)),
            }
        }

        let cutoff: usize = t.value("space.cutoff")?.unwrap_or(kerr_rabi_core::dynamics::DEFAULT_CUTOFF);
        let space = FockSpace::new(cutoff).map_err(|e| invalid("space.cutoff", e))?;
        if (pair.upper as usize) + 2 > cutoff {
            return Err(invalid("space.cutoff", "must exceed pair.n by at least 2"));
        }
        let leak_guard = match t.get("space.leak_guard") {
            None => kerr_rabi_core::dynamics::LEAK_GUARD,
            Some(v) => parse_leak_guard(v).ok_or_else(|| invalid("space.leak_guard", "expected a positive population or `off`"))?,
        };
        let t_end = t
            .finite("time.t_end")?
            .ok_or_else(|| ConfigError::Missing("time.t_end".to_string()))?;
        if t_end <= 0.0 {
            return Err(invalid("time.t_end", "must be positive"));
        }
        let dt = match t.get("time.dt") {
            None | Some("auto") => StepSpec::Auto,
            Some(_) => {
                let dt = t.finite("time.dt")?.unwrap_or(0.0);
                if dt <= 0.0 {
                    return Err(invalid("time.dt", "must be positive or `auto`"));
                }
                StepSpec::Fixed(dt)
            }
        };
        let points: usize = t.value("time.points")?.unwrap_or(2000);
        if points == 0 {
            return Err(invalid("time.points", "must be at least 1"));
        }
        let realizations: usize = t.value("run.realizations")?.unwrap_or(1000);
        if realizations == 0 {
            return Err(invalid("run.realizations", "must be at least 1"));
        }
        let seed: u64 = t.value("run.seed")?.unwrap_or(0);
        let models = match t.get("run.models") {
            None => Models {
                effective: true,
                master: true,
                analytic: true,
                ..Models::default()
            },
            Some(s) => {
                Models::parse(s).ok_or_else(|| invalid("run.models", "expected a non-empty list of full, effective, master, analytic"))?
            }
        };
        let effective_mode = match t.get("run.effective_mode") {
            None | Some("full_effective") => EffectiveMode::FullEffective,
            Some("linearized") => EffectiveMode::Linearized,
            Some(_) => return Err(invalid("run.effective_mode", "expected full_effective or linearized")),
        };
        let output_dir = PathBuf::from(t.get("output.dir").unwrap_or("out"));
        let write_traces: bool = t.value("output.traces")?.unwrap_or(false);

        Ok(ExperimentConfig {
            oscillator,
            pair,
            g0,
            detuning,
            noise,
            space,
            leak_guard,
            t_end,
            dt,
            points,
            realizations,
            seed,
            models,
            effective_mode,
            output_dir,
            write_traces,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "pair.n = 3\ndrive.g0 = 0.03\ndrive.auto_resonance = bare\ntime.t_end = 100\n";

    #[test]
    fn defaults() {
        let c: ExperimentConfig = MINIMAL.parse().unwrap();
        assert_eq!(c.oscillator.alpha, 1.0);
        assert_eq!(c.pair.lower, 0);
        assert_eq!(c.space.cutoff(), 11);
        assert_eq!(c.dt, StepSpec::Auto);
        assert_eq!(c.realizations, 1000);
        assert!(c.noise.is_empty());
        assert_eq!(c.detuning, DetuningSpec::Auto(AutoResonance::Bare));
    }

    #[test]
    fn comments_and_meta_are_ignored() {
        let text = format!("# header\n{MINIMAL}meta.version = 9 # trailing\n\n");
        assert!(text.parse::<ExperimentConfig>().is_ok());
    }

    #[test]
    fn schema_violations() {
        let bad = |extra: &str| format!("{MINIMAL}{extra}\n").parse::<ExperimentConfig>().unwrap_err();
        assert!(matches!(bad("bogus.key = 1"), ConfigError::UnknownKey(_)));
        assert!(matches!(bad("pair.n = 4"), ConfigError::Duplicate(_)));
        assert!(matches!(bad("noise.amplitude.sigma = 0.1"), ConfigError::Missing(_)));
        assert!(matches!(bad("run.realizations = 0"), ConfigError::Value { .. }));
        assert!(matches!(bad("drive.delta0 = 1.5"), ConfigError::Value { .. }));
        assert!(matches!(bad("run.models = full,psychic"), ConfigError::Value { .. }));
        assert!(matches!(bad("just words"), ConfigError::Syntax { line: 5, .. }));
        assert!(matches!("pair.n = 3".parse::<ExperimentConfig>(), Err(ConfigError::Missing(_))));
    }

    #[test]
    fn text_round_trip() {
        let text = "oscillator.kappa = -0.025\npair.n = 5\ndrive.g0 = 0.138884\ndrive.delta0 = 1.872625\n\
                    drive.delta0_effective = 1.8726218\nnoise.amplitude.sigma = 0.0138884\nnoise.amplitude.tau = 100\n\
                    noise.frequency.sigma = 0.001\nnoise.frequency.tau = 50\ntime.t_end = 60000\ntime.dt = 2.5\n\
                    run.models = full,analytic\nrun.effective_mode = linearized\noutput.traces = true\n";
        let c: ExperimentConfig = text.parse().unwrap();
        let again: ExperimentConfig = c.to_text().parse().unwrap();
        assert_eq!(c, again);
        assert_eq!(again.to_text(), c.to_text());
    }
}
