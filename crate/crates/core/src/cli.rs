//! Command-line front end. Exit codes: 0 success, 1 numerical or validation
//! failure, 2 usage or configuration error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::channel::{equivalent_gain, expected_gain_exact};
use crate::config::SimConfig;
use crate::correlation::Kernel;
use crate::error::{Error, Result};
use crate::experiment::run_sweep_to_dir;
use crate::rng::realization_seed;
use crate::scenario::{build_scenario, SpecularPath, UserGeometry};
use crate::scheduling::run_block_pipeline;
use crate::validation::{miscalibrate, validate_correlation, validate_gains, CorrelationGrid};

#[derive(Debug, Parser)]
#[command(name = "xlmimo", version, about = "Near-field XL-MIMO scheduling simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set scenario.num_users=20`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Replace the master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<SimConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        if let Some(t) = self.threads {
            overrides.push(format!("sweep.threads={t}"));
        }
        let config = match &self.config {
            Some(path) => SimConfig::load(path, &overrides)?,
            None => SimConfig::from_toml("", &overrides)?,
        };
        if let Some(t) = self.threads.filter(|&t| t > 0) {
            // a second global init is harmless; the first one wins
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelArg {
    /// The quadratic phase integrated in closed form.
    SmallAngle,
    /// Exact trigonometric Fresnel phase.
    Fresnel,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One realization of every configured mode; prints per-user SE.
    Run {
        #[command(flatten)]
        common: Common,
        /// Realization index under the master seed.
        #[arg(long, default_value_t = 0)]
        realization: usize,
        /// SNR in dB; defaults to `scenario.snr_db`.
        #[arg(long)]
        snr_db: Option<f64>,
    },
    /// Monte Carlo sweep writing raw and aggregate CSVs.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Output directory, created if missing.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Correlation closed form against quadrature and the far-field limit.
    ValidateCorrelation {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "small-angle")]
        kernel: KernelArg,
        /// Distances of the quadrature grid, meters.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e6)]
        farfield_radius: f64,
        #[arg(long, default_value_t = 1)]
        pair_stride: usize,
        /// Relative error injected into the closed form (negative control).
        #[arg(long, default_value_t = 0.0, hide = true)]
        inject_fault: f64,
    },
    /// Monte Carlo mean of ||h||^2 against the exact and equivalent gains.
    ValidateGains {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        draws: usize,
        /// Check only the first N users.
        #[arg(long)]
        users: Option<usize>,
        /// Scale every diffuse covariance by this factor (negative control).
        #[arg(long, hide = true)]
        miscalibrate: Option<f64>,
    },
    /// Writes the geometry, gains and optionally one correlation matrix.
    DumpScenario {
        #[command(flatten)]
        common: Common,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        realization: usize,
        /// Also write `correlation_<k>.csv` for this user.
        #[arg(long)]
        correlation: Option<usize>,
    },
}

/// Parses `std::env::args` and runs the command.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

pub fn execute(cli: Cli) -> Result<ExitCode> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Run {
            common,
            realization,
            snr_db,
        } => run(&common.load()?, realization, snr_db, &mut out),
        Command::Sweep { common, out: dir } => sweep(&common.load()?, &dir),
        Command::ValidateCorrelation {
            common,
            kernel,
            radii,
            farfield_radius,
            pair_stride,
            inject_fault,
        } => {
            let config = common.load()?;
            let kernel = match kernel {
                KernelArg::SmallAngle => Kernel::SmallAngle,
                KernelArg::Fresnel => Kernel::Fresnel,
            };
            let mut grid = CorrelationGrid::standard(&config.scenario, kernel)?;
            if let Some(r) = radii {
                grid.radii = r;
            }
            grid.farfield_radius = farfield_radius;
            grid.pair_stride = pair_stride;
            grid.fault = inject_fault;
            correlation_check(&grid, &mut out)
        }
        Command::ValidateGains {
            common,
            draws,
            users,
            miscalibrate: factor,
        } => {
            let config = common.load()?;
            gains_check(&config, draws, users, factor, &mut out)
        }
        Command::DumpScenario {
            common,
            out: dir,
            realization,
            correlation,
        } => dump_scenario(&common.load()?, &dir, realization, correlation, &mut out),
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn run(config: &SimConfig, realization: usize, snr_db: Option<f64>, out: &mut impl Write) -> Result<ExitCode> {
    let seed = realization_seed(config.seed, realization);
    let snr = snr_db.unwrap_or(config.scenario.snr_db);
    let scenario = build_scenario(&config.scenario, seed)?;
    let ctx = config.block_context(snr);
    let results = run_block_pipeline(&scenario, &config.aging, &ctx, seed)?;
    writeln!(
        out,
        "realization {realization} seed {seed} M={} K={} snr_db={snr}",
        scenario.num_antennas(),
        scenario.num_users()
    )
    .map_err(io_err)?;
    let mut failed = false;
    for (mode, result) in results {
        match result {
            Ok(o) => {
                writeln!(out, "[{mode}] prelog {:.6} candidates {}", o.prelog, o.candidates.len()).map_err(io_err)?;
                writeln!(out, "  {:>6} {:>12}", "user", "se").map_err(io_err)?;
                for (k, se) in o.scheduled.iter().zip(&o.per_user_se) {
                    writeln!(out, "  {k:>6} {se:>12.6}").map_err(io_err)?;
                }
                writeln!(out, "  sum_se {:.6} ({} users)", o.sum_se, o.scheduled.len()).map_err(io_err)?;
            }
            Err(e) => {
                failed = true;
                eprintln!("{mode}: {e}");
            }
        }
    }
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn sweep(config: &SimConfig, dir: &Path) -> Result<ExitCode> {
    let progress = |label: &str, done: usize, total: usize| {
        let tag = if label.is_empty() {
            String::new()
        } else {
            format!("[{label}] ")
        };
        eprintln!("{tag}realization {done}/{total}");
    };
    let files = run_sweep_to_dir(config, dir, Some(&progress))?;
    let mut failures = 0;
    for f in &files {
        for w in &f.warnings {
            eprintln!("warning: {w}");
        }
        for msg in &f.failures {
            eprintln!("failed: {msg}");
        }
        failures += f.failures.len();
        eprintln!("wrote {} and {}", f.raw.display(), f.aggregate.display());
    }
    if failures > 0 {
        eprintln!("{failures} failed runs excluded from the aggregates");
    }
    Ok(ExitCode::SUCCESS)
}

fn correlation_check(grid: &CorrelationGrid, out: &mut impl Write) -> Result<ExitCode> {
    let report = validate_correlation(grid)?;
    let q = report.quadrature;
    let f = report.farfield;
    writeln!(
        out,
        "quadrature ({:?} kernel, {} entries): max |error|/beta = {:.3e} at m={} n={} r={} theta={:.4} [{}]",
        report.kernel,
        report.entries,
        q.error,
        q.m,
        q.n,
        q.radius,
        q.angle,
        if report.quadrature_ok() { "ok" } else { "FAIL" }
    )
    .map_err(io_err)?;
    writeln!(
        out,
        "far field (r={}): max |error|/beta = {:.3e} at m={} n={} theta={:.4} [{}]",
        f.radius,
        f.error,
        f.m,
        f.n,
        f.angle,
        if report.farfield_ok() { "ok" } else { "FAIL" }
    )
    .map_err(io_err)?;
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn gains_check(
    config: &SimConfig,
    draws: usize,
    users: Option<usize>,
    factor: Option<f64>,
    out: &mut impl Write,
) -> Result<ExitCode> {
    if draws < 2 {
        return Err(Error::Config("need at least two draws".into()));
    }
    let seed = realization_seed(config.seed, 0);
    let mut scenario = build_scenario(&config.scenario, seed)?;
    if let Some(f) = factor {
        miscalibrate(&mut scenario, f);
    }
    let count = users.unwrap_or(scenario.num_users()).min(scenario.num_users());
    let ids: Vec<usize> = (0..count).collect();
    let checks = validate_gains(&scenario, &ids, draws, seed);
    writeln!(
        out,
        "{:>6} {:>14} {:>14} {:>14} {:>8} {:>10}",
        "user", "mc_mean", "exact", "equivalent", "z", "identity"
    )
    .map_err(io_err)?;
    let mut bad = Vec::new();
    for c in &checks {
        writeln!(
            out,
            "{:>6} {:>14.6} {:>14.6} {:>14.6} {:>8.3} {:>10.2e}",
            c.user,
            c.sample_mean,
            c.expected,
            c.equivalent,
            c.z_score(),
            c.identity_error()
        )
        .map_err(io_err)?;
        if !(c.monte_carlo_ok() && c.identity_ok()) {
            bad.push(c.user);
        }
    }
    if bad.is_empty() {
        writeln!(out, "all {} users within 3 sigma; identity within 1e-10", checks.len()).map_err(io_err)?;
        Ok(ExitCode::SUCCESS)
    } else {
        writeln!(out, "FAIL: users {bad:?}").map_err(io_err)?;
        Ok(ExitCode::from(1))
    }
}

#[derive(Serialize)]
struct UserDump<'a> {
    user: usize,
    geometry: UserGeometry,
    paths: &'a [SpecularPath],
    expected_gain: f64,
    equivalent_gain: f64,
    correlation_trace: f64,
}

#[derive(Serialize)]
struct ScenarioDump<'a> {
    seed: u64,
    num_antennas: usize,
    spacing: f64,
    wavelength: f64,
    users: Vec<UserDump<'a>>,
}

fn dump_scenario(
    config: &SimConfig,
    dir: &Path,
    realization: usize,
    correlation: Option<usize>,
    out: &mut impl Write,
) -> Result<ExitCode> {
    let seed = realization_seed(config.seed, realization);
    let scenario = build_scenario(&config.scenario, seed)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let dump = ScenarioDump {
        seed,
        num_antennas: scenario.num_antennas(),
        spacing: scenario.array.spacing,
        wavelength: scenario.array.wavelength,
        users: scenario
            .users
            .iter()
            .enumerate()
            .map(|(k, u)| UserDump {
                user: k,
                geometry: u.geometry,
                paths: &u.paths,
                expected_gain: expected_gain_exact(&scenario, k),
                equivalent_gain: equivalent_gain(&scenario, k),
                correlation_trace: u.correlation.trace(),
            })
            .collect(),
    };
    let path = dir.join("scenario.json");
    let text = serde_json::to_string_pretty(&dump).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    writeln!(out, "{}", path.display()).map_err(io_err)?;
    if let Some(k) = correlation {
        if k >= scenario.num_users() {
            return Err(Error::Config(format!("user {k} out of range")));
        }
        let path = dir.join(format!("correlation_{k}.csv"));
        scenario.user(k).correlation.write_csv(&path)?;
        writeln!(out, "{}", path.display()).map_err(io_err)?;
    }
    Ok(ExitCode::SUCCESS)
}
