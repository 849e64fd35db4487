use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kerr_rabi::config::{parse_leak_guard, Models};
use kerr_rabi::ensemble::{run_experiment, RunOptions};
use kerr_rabi::output::write_or_print;
use kerr_rabi::presets::preset_table1;
use kerr_rabi::{scans, AppError, ConfigError, ExperimentConfig};
use kerr_rabi_core::noise::{NoiseChannel, NoiseTarget};
use kerr_rabi_core::spectrum::{resonant_detuning_bare, OscillatorParams, ResonantPair};
use kerr_rabi_core::FockSpace;

#[derive(Parser)]
#[command(
    name = "kerr-rabi",
    version,
    about = "Multi-photon Rabi oscillations of a driven Kerr oscillator under drive noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run {
        config: PathBuf,
        /// Override `output.dir`.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the noise path of realization 0 as `noise.csv`.
        #[arg(long)]
        dump_noise: bool,
        /// Override `space.leak_guard` (a population or `off`).
        #[arg(long, value_parser = leak_guard)]
        leak_guard: Option<f64>,
    },
    /// Run a shipped preset.
    Preset {
        #[command(subcommand)]
        preset: Preset,
    },
    /// Quasienergy data: bare parabola, tracked curves versus g, or correction differences versus κ.
    ScanResonance {
        #[arg(long, value_enum, default_value_t = ResonanceMode::Parabola)]
        mode: ResonanceMode,
        #[arg(long, default_value_t = -0.025, allow_hyphen_values = true)]
        kappa: f64,
        /// Detuning; defaults to the bare resonance of the pair.
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 5)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        nprime: u32,
        #[arg(long, default_value_t = 0.3)]
        g_max: f64,
        #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
        kappa_min: f64,
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        kappa_max: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long, default_value_t = 11)]
        cutoff: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Rabi-period lower bound versus κ for transitions by 3, 4 and 5 quanta.
    ScanTtilde {
        #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
        kappa_min: f64,
        #[arg(long, default_value_t = -0.001, allow_hyphen_values = true)]
        kappa_max: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Recompute Γ/(2ω^R) for every reference row.
    AuditTable1 {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sample noise paths as `t,xi1,xi2`.
    DumpNoise {
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, default_value_t = 0.0)]
        freq_sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        freq_tau: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Preset {
    /// Reference table rows 1 to 7.
    Table1 {
        #[arg(long)]
        row: usize,
        /// Comma-separated subset of full, effective, master, analytic.
        #[arg(long)]
        models: Option<String>,
        #[arg(long)]
        realizations: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        dump_noise: bool,
        /// Population of the top two Fock levels that aborts a full-model run, or `off`.
        #[arg(long, value_parser = leak_guard)]
        leak_guard: Option<f64>,
    },
}

fn leak_guard(s: &str) -> Result<f64, String> {
    parse_leak_guard(s).ok_or_else(|| "expected a positive population or `off`".to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum ResonanceMode {
    Parabola,
    Curves,
    Corrections,
}

fn config_value(key: &str, message: impl Into<String>) -> AppError {
    AppError::Config(ConfigError::Value {
        key: key.to_string(),
        message: message.into(),
    })
}

fn execute(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Run {
            config,
            output,
            dump_noise,
            leak_guard,
        } => {
            let mut c = ExperimentConfig::from_file(&config)?;
            if let Some(o) = output {
                c.output_dir = o;
            }
            if let Some(l) = leak_guard {
                c.leak_guard = l;
            }
            run_experiment(&c, RunOptions { threads: None, dump_noise })?;
        }
        Command::Preset {
            preset:
                Preset::Table1 {
                    row,
                    models,
                    realizations,
                    seed,
                    output,
                    dump_noise,
                    leak_guard,
                },
        } => {
            let mut c = preset_table1(row).ok_or_else(|| config_value("row", "must be between 1 and 7"))?;
            if let Some(m) = models {
                c.models =
                    Models::parse(&m).ok_or_else(|| config_value("models", "expected a list of full, effective, master, analytic"))?;
            }
            if let Some(n) = realizations {
                if n == 0 {
                    return Err(config_value("realizations", "must be at least 1"));
                }
                c.realizations = n;
            }
            if let Some(s) = seed {
                c.seed = s;
            }
            if let Some(l) = leak_guard {
                c.leak_guard = l;
            }
            if let Some(o) = output {
                c.output_dir = o;
            }
            run_experiment(&c, RunOptions { threads: None, dump_noise })?;
        }
        Command::ScanResonance {
            mode,
            kappa,
            delta,
            n,
            nprime,
            g_max,
            kappa_min,
            kappa_max,
            points,
            cutoff,
            output,
        } => {
            let pair = ResonantPair::new(n, nprime).map_err(|e| config_value("n", e.to_string()))?;
            let space = FockSpace::new(cutoff).map_err(|e| config_value("cutoff", e.to_string()))?;
            let body = match mode {
                ResonanceMode::Corrections => scans::corrections(pair, kappa_min, kappa_max, points)?,
                _ => {
                    let p = OscillatorParams::with_kappa(kappa).map_err(|e| config_value("kappa", e.to_string()))?;
                    let d = delta.unwrap_or_else(|| resonant_detuning_bare(&p, pair));
                    match mode {
                        ResonanceMode::Parabola => scans::parabola(&p, d, space),
                        _ => scans::curves(&p, pair, d, g_max, points, space)?,
                    }
                }
            };
            write_or_print(output.as_deref(), &body)?;
        }
        Command::ScanTtilde {
            kappa_min,
            kappa_max,
            points,
            eta,
            output,
        } => write_or_print(output.as_deref(), &scans::ttilde(kappa_min, kappa_max, points, eta)?)?,
        Command::AuditTable1 { output } => write_or_print(output.as_deref(), &scans::audit_table1()?)?,
        Command::DumpNoise {
            sigma,
            tau,
            freq_sigma,
            freq_tau,
            dt,
            steps,
            seed,
            output,
        } => {
            let channel = |s: f64, t: f64, target| -> Result<Option<NoiseChannel>, AppError> {
                if s == 0.0 {
                    return Ok(None);
                }
                NoiseChannel::new(s, t, target)
                    .map(Some)
                    .map_err(|e| config_value("noise", e.to_string()))
            };
            let a = channel(sigma, tau, NoiseTarget::Amplitude)?;
            let f = channel(freq_sigma, freq_tau, NoiseTarget::Frequency)?;
            if steps == 0 {
                return Err(config_value("steps", "must be at least 1"));
            }
            write_or_print(output.as_deref(), &scans::dump_noise(a, f, dt, steps, seed)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
