//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 domain error.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand};

use crate::analysis::{total_efficiency, CorrectionReport};
use crate::error::{Error, Result};
use crate::experiment::{
    calibrate_kerr, energy_sweep, inclusive_grid, rotate_sweep, BenchConfig, TraceMetadata,
    ANALYSIS_FREQUENCY_MHZ, RESOLUTION_BANDWIDTH_KHZ, VIDEO_BANDWIDTH_HZ,
};
use crate::fock::compare_with_linearized;

use self::config::{config_lines, parse_config};
use self::output::{energy_csv, fmt_sig, report, rotate_csv, RunManifest};

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "KERRPOL_THREADS";
/// Acceptance threshold of `verify-oracle`.
pub const ORACLE_TOLERANCE: f64 = 0.05;
/// θ samples used by `verify-oracle`.
pub const ORACLE_THETA_POINTS: usize = 16;

#[derive(Debug, Parser)]
#[command(
    name = "kerrpol",
    version,
    about = "Polarization squeezing from Kerr fibers, linearized Stokes model"
)]
struct Cli {
    /// Bench configuration file (`key = value`).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Leave the timestamp out of the manifest.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Noise trace against waveplate angle.
    RotateSweep {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi_start: f64,
        #[arg(long, default_value_t = 90.0, allow_negative_numbers = true)]
        phi_end: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        phi_step: f64,
        /// Pulse energy in pJ, overriding the config.
        #[arg(long, allow_negative_numbers = true)]
        energy: Option<f64>,
        /// Coherent reference beam: no Kerr shear and no excess noise.
        #[arg(long)]
        coherent: bool,
    },
    /// Squeezing, anti-squeezing and angle against pulse energy.
    EnergySweep {
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        e_start: f64,
        #[arg(long, default_value_t = 150.0, allow_negative_numbers = true)]
        e_end: f64,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        e_step: f64,
    },
    /// Fits the Kerr coefficient to a squeezing level and emits a config.
    Calibrate {
        #[arg(long, allow_negative_numbers = true)]
        target_db: f64,
        #[arg(long, allow_negative_numbers = true)]
        at_energy: f64,
    },
    /// Infers source squeezing from a measured value.
    #[command(group(ArgGroup::new("efficiency").required(true).args(["eta", "losses"])))]
    Analyze {
        #[arg(long, allow_negative_numbers = true)]
        measured_db: f64,
        /// Total detection efficiency.
        #[arg(long, allow_negative_numbers = true)]
        eta: Option<f64>,
        /// Comma-separated stage losses.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        losses: Option<Vec<f64>>,
        #[arg(long, allow_negative_numbers = true)]
        electronic_dbm: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        raw_dbm: Option<f64>,
    },
    /// Checks the linearized model against exact Fock-space variances.
    VerifyOracle {
        #[arg(long, allow_negative_numbers = true)]
        alpha2: f64,
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, default_value_t = 30)]
        nmax: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::RotateSweep { .. } => "rotate-sweep",
            Command::EnergySweep { .. } => "energy-sweep",
            Command::Calibrate { .. } => "calibrate",
            Command::Analyze { .. } => "analyze",
            Command::VerifyOracle { .. } => "verify-oracle",
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };

    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let outcome = match pool {
        Some(pool) => pool.install(|| execute(&cli)),
        None => execute(&cli),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>> {
    let Some(raw) = std::env::var_os(THREADS_ENV) else {
        return Ok(None);
    };
    let text = raw.to_string_lossy();
    let n: usize = text.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Config(format!(
            "{THREADS_ENV} must be a positive integer, got `{text}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))
}

fn load_config(path: Option<&Path>) -> Result<BenchConfig> {
    match path {
        Some(p) => parse_config(p),
        None => Ok(BenchConfig::default()),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let cfg = load_config(cli.config.as_deref())?;
    let manifest = RunManifest::new(
        cli.command.name(),
        cli.config.clone(),
        cli.out.clone(),
        !cli.no_timestamp,
    );
    let out = cli.out.as_deref();

    match &cli.command {
        Command::RotateSweep {
            phi_start,
            phi_end,
            phi_step,
            energy,
            coherent,
        } => {
            let mut cfg = cfg;
            if let Some(e) = energy {
                cfg = cfg.with_energy(*e);
            }
            if *coherent {
                cfg.kerr_coefficient = 0.0;
                cfg.thermal_noise_coeff = 0.0;
            }
            cfg.validate()?;
            cfg.energy()?;
            let grid = inclusive_grid(*phi_start, *phi_end, *phi_step).map_err(usage)?;
            let trace = rotate_sweep(&cfg, &grid)?;
            write_output(out, &rotate_csv(&trace, &manifest))?;
        }
        Command::EnergySweep {
            e_start,
            e_end,
            e_step,
        } => {
            let grid = inclusive_grid(*e_start, *e_end, *e_step).map_err(usage)?;
            let points = energy_sweep(&cfg, &grid)?;
            let meta = TraceMetadata {
                config: cfg,
                analysis_frequency_mhz: ANALYSIS_FREQUENCY_MHZ,
                rbw_khz: RESOLUTION_BANDWIDTH_KHZ,
                vbw_hz: VIDEO_BANDWIDTH_HZ,
            };
            write_output(out, &energy_csv(&points, &meta, &manifest))?;
        }
        Command::Calibrate {
            target_db,
            at_energy,
        } => {
            let kappa = calibrate_kerr(&cfg, *target_db, *at_energy)?;
            let mut fitted = cfg.with_energy(*at_energy);
            fitted.kerr_coefficient = kappa;
            let mut body = String::new();
            body.push_str(&format!("# target_db: {}\n", fmt_sig(*target_db)));
            body.push_str(&format!("# at_energy_pj: {}\n", fmt_sig(*at_energy)));
            body.push_str(&format!(
                "# gamma: {}\n",
                fmt_sig(fitted.gamma_at(*at_energy))
            ));
            for line in config_lines(&fitted) {
                body.push_str(&line);
                body.push('\n');
            }
            write_output(out, &report(&manifest, &body))?;
        }
        Command::Analyze {
            measured_db,
            eta,
            losses,
            electronic_dbm,
            raw_dbm,
        } => {
            let eta = match (eta, losses) {
                (Some(eta), None) => *eta,
                (None, Some(losses)) => total_efficiency(losses)?,
                _ => {
                    return Err(Error::Config(
                        "give exactly one of --eta and --losses".into(),
                    ))
                }
            };
            let rep = CorrectionReport::infer(*measured_db, eta, *electronic_dbm, *raw_dbm)?;
            write_output(out, &report(&manifest, &rep.to_string()))?;
        }
        Command::VerifyOracle {
            alpha2,
            gamma,
            nmax,
        } => {
            let cmp = compare_with_linearized(*alpha2, *gamma, *nmax, ORACLE_THETA_POINTS)?;
            let dev = cmp.max_rel_deviation();
            let pass = dev <= ORACLE_TOLERANCE;
            let mut body = format!(
                "alpha2: {}\ngamma: {}\nnmax: {}\ntheta_points: {}\ntolerance: {}\nmax_rel_deviation: {}\nstatus: {}\n",
                fmt_sig(cmp.alpha_sq),
                fmt_sig(cmp.gamma),
                cmp.n_max,
                cmp.points.len(),
                fmt_sig(ORACLE_TOLERANCE),
                fmt_sig(dev),
                if pass { "pass" } else { "fail" },
            );
            for (k, p) in cmp.points.iter().enumerate() {
                body.push_str(&format!(
                    "point_{k:02}: theta_rad={} exact={} linearized={} rel_deviation={}\n",
                    fmt_sig(p.theta),
                    fmt_sig(p.exact),
                    fmt_sig(p.linearized),
                    fmt_sig(p.rel_deviation()),
                ));
            }
            write_output(out, &report(&manifest, &body))?;
            if !pass {
                eprintln!(
                    "error: max relative deviation {} exceeds {ORACLE_TOLERANCE}",
                    fmt_sig(dev)
                );
                return Ok(2);
            }
        }
    }
    Ok(0)
}

/// Malformed sweep ranges are flag problems, not physics.
fn usage(e: Error) -> Error {
    match e {
        Error::Parameter(msg) => Error::Config(msg),
        other => other,
    }
}
