use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Two bare levels entering a perturbative denominator are (nearly) degenerate.
    #[error("levels {level} and {other} are degenerate (splitting {splitting:e}); perturbation theory is invalid here")]
    DegenerateLevels { level: u32, other: u32, splitting: f64 },

    #[error("no sign change of the resonance condition in [{lower}, {upper}]")]
    NoRoot { lower: f64, upper: f64 },

    #[error("Fock cutoff too small: tracked level {level} has weight {weight:e} on the top two Fock states")]
    CutoffTooSmall { level: u32, weight: f64 },

    #[error("peak population transfer {best:.3} < 0.5 everywhere in the search bracket")]
    NoTransfer { best: f64 },

    #[error("invalid time step {dt}")]
    InvalidStep { dt: f64 },

    #[error("path of length {len} is too short for max lag {max_lag}")]
    PathTooShort { len: usize, max_lag: usize },

    #[error("state norm drifted by {deviation:e} at t = {time}")]
    NormDrift { time: f64, deviation: f64 },

    #[error("population {population:e} leaked into the top two Fock levels at t = {time}")]
    CutoffLeak { time: f64, population: f64 },

    #[error("target level {level} is resonant with the initial level (splitting {splitting:e})")]
    ResonantTarget { level: u32, splitting: f64 },

    #[error("quasienergy correction difference {difference:e} vanishes; no overdamping bound exists")]
    KerrDegenerate { difference: f64 },

    #[error("ODE solver failed at t = {time}")]
    SolverFailure { time: f64 },
}

impl Error {
    /// True for the guards that signal an untrustworthy trajectory rather than bad input.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(self, Error::NormDrift { .. } | Error::CutoffLeak { .. })
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn require(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason })
    }
}
