//! Monte Carlo sweeps over realizations and SNR points, aggregation and the
//! CSV files consumed by the plotting scripts.
//!
//! Raw CSV columns:
//! `scheduler,snr_db,realization,seed,sum_se,n_scheduled,n_candidates,prelog,runtime_ms`.
//! A failed (mode, SNR, realization) row carries `NaN` in `sum_se` and
//! `prelog` and is left out of the aggregates.
//!
//! Aggregate CSV columns: `scheduler,snr_db,mean_se,stderr_se,ci95_lo,ci95_hi,n`.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::rng::realization_seed;
use crate::scenario::build_scenario;
use crate::scheduling::{draw_realization, evaluate_modes, SchedulerMode};

pub const RAW_HEADER: [&str; 9] = [
    "scheduler",
    "snr_db",
    "realization",
    "seed",
    "sum_se",
    "n_scheduled",
    "n_candidates",
    "prelog",
    "runtime_ms",
];

pub const AGGREGATE_HEADER: [&str; 7] = ["scheduler", "snr_db", "mean_se", "stderr_se", "ci95_lo", "ci95_hi", "n"];

/// A named set of overrides producing one pair of output files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepVariant {
    pub label: String,
    /// `dotted.key=value` overrides applied to the base configuration.
    #[serde(default)]
    pub set: Vec<String>,
}

/// `[sweep]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub snr_db: Vec<f64>,
    pub realizations: usize,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    /// Write measured wall-clock times instead of zeros. Breaks byte-identical
    /// reruns.
    pub record_runtime: bool,
    pub variants: Vec<SweepVariant>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            snr_db: vec![20.0],
            realizations: 100,
            threads: 0,
            record_runtime: false,
            variants: Vec::new(),
        }
    }
}

impl SweepSection {
    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config(
                "sweep.snr_db must be a non-empty list of finite values".into(),
            ));
        }
        if self.realizations == 0 {
            return Err(Error::Config("sweep.realizations must be positive".into()));
        }
        let mut labels: Vec<&str> = self.variants.iter().map(|v| v.label.as_str()).collect();
        if labels
            .iter()
            .any(|l| l.is_empty() || !l.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)))
        {
            return Err(Error::Config("variant labels must be non-empty [A-Za-z0-9._-]".into()));
        }
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != self.variants.len() {
            return Err(Error::Config("variant labels must be unique".into()));
        }
        Ok(())
    }
}

/// One row of the raw CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub scheduler: SchedulerMode,
    pub snr_db: f64,
    pub realization: usize,
    pub seed: u64,
    /// `NaN` when the run failed.
    pub sum_se: f64,
    pub n_scheduled: usize,
    pub n_candidates: usize,
    pub prelog: f64,
    pub runtime_ms: f64,
}

impl ExperimentRecord {
    pub fn failed(&self) -> bool {
        self.sum_se.is_nan()
    }
}

/// Output of [`snr_sweep`]: records sorted by (mode, SNR, realization) in
/// configuration order, plus the failure messages.
#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub records: Vec<ExperimentRecord>,
    pub failures: Vec<String>,
}

fn failed_record(mode: SchedulerMode, snr_db: f64, realization: usize, seed: u64) -> ExperimentRecord {
    ExperimentRecord {
        scheduler: mode,
        snr_db,
        realization,
        seed,
        sum_se: f64::NAN,
        n_scheduled: 0,
        n_candidates: 0,
        prelog: f64::NAN,
        runtime_ms: 0.0,
    }
}

fn run_realization(config: &SimConfig, index: usize, failures: &mut Vec<String>) -> Vec<ExperimentRecord> {
    let seed = realization_seed(config.seed, index);
    let modes = &config.scheduler.modes;
    let mut out = Vec::with_capacity(modes.len() * config.sweep.snr_db.len());
    let world =
        build_scenario(&config.scenario, seed).and_then(|s| draw_realization(&s, &config.aging, seed).map(|r| (s, r)));
    let (scenario, realization) = match world {
        Ok(w) => w,
        Err(e) => {
            failures.push(format!("realization {index}: {e}"));
            for &snr in &config.sweep.snr_db {
                out.extend(modes.iter().map(|&m| failed_record(m, snr, index, seed)));
            }
            return out;
        }
    };
    for &snr in &config.sweep.snr_db {
        let ctx = config.block_context(snr);
        let start = Instant::now();
        let results = evaluate_modes(&scenario, &realization, &ctx, modes);
        let per_mode_ms = start.elapsed().as_secs_f64() * 1e3 / modes.len() as f64;
        for (mode, result) in results {
            out.push(match result {
                Ok(o) => ExperimentRecord {
                    scheduler: mode,
                    snr_db: snr,
                    realization: index,
                    seed,
                    sum_se: o.sum_se,
                    n_scheduled: o.scheduled.len(),
                    n_candidates: o.candidates.len(),
                    prelog: o.prelog,
                    runtime_ms: if config.sweep.record_runtime { per_mode_ms } else { 0.0 },
                },
                Err(e) => {
                    failures.push(format!("realization {index}, {mode} at {snr} dB: {e}"));
                    failed_record(mode, snr, index, seed)
                }
            });
        }
    }
    out
}

/// Runs every realization of `config` in parallel. `progress` is called with
/// (finished, total) after each realization.
pub fn snr_sweep(config: &SimConfig, progress: Option<&(dyn Fn(usize, usize) + Sync)>) -> Result<SweepOutput> {
    config.validate()?;
    let total = config.sweep.realizations;
    let done = AtomicUsize::new(0);
    let work = || {
        (0..total)
            .into_par_iter()
            .map(|index| {
                let mut failures = Vec::new();
                let records = run_realization(config, index, &mut failures);
                let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
                if let Some(report) = progress {
                    report(finished, total);
                }
                (records, failures)
            })
            .collect::<Vec<_>>()
    };
    let chunks = if config.sweep.threads == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.sweep.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)
    };
    let mut output = SweepOutput::default();
    for (records, failures) in chunks {
        output.records.extend(records);
        output.failures.extend(failures);
    }
    let mode_rank = |m: SchedulerMode| {
        config
            .scheduler
            .modes
            .iter()
            .position(|&x| x == m)
            .unwrap_or(usize::MAX)
    };
    let snr_rank = |s: f64| config.sweep.snr_db.iter().position(|&x| x == s).unwrap_or(usize::MAX);
    output
        .records
        .sort_by_key(|r| (mode_rank(r.scheduler), snr_rank(r.snr_db), r.realization));
    Ok(output)
}

/// One row of the aggregate CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub scheduler: SchedulerMode,
    pub snr_db: f64,
    pub mean_se: f64,
    pub stderr_se: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    /// Successful realizations.
    pub n: usize,
}

#[derive(Debug, Clone, Default)]
pub struct AggregateReport {
    pub rows: Vec<AggregateRow>,
    pub warnings: Vec<String>,
}

/// Mean, standard error `s / sqrt(n)` and Student-t 95 % interval of the sum
/// SE per (mode, SNR), in order of first appearance. Failed records are
/// skipped; a cell without successful records is omitted with a warning.
pub fn aggregate(records: &[ExperimentRecord]) -> AggregateReport {
    let mut keys: Vec<(SchedulerMode, f64)> = Vec::new();
    for r in records {
        if !keys.iter().any(|&(m, s)| m == r.scheduler && s == r.snr_db) {
            keys.push((r.scheduler, r.snr_db));
        }
    }
    let mut report = AggregateReport::default();
    for (mode, snr) in keys {
        let values: Vec<f64> = records
            .iter()
            .filter(|r| r.scheduler == mode && r.snr_db == snr && !r.failed())
            .map(|r| r.sum_se)
            .collect();
        let n = values.len();
        if n == 0 {
            report
                .warnings
                .push(format!("{mode} at {snr} dB: every realization failed, cell omitted"));
            continue;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let (stderr, half) = if n < 2 {
            report
                .warnings
                .push(format!("{mode} at {snr} dB: one realization, standard error set to 0"));
            (0.0, 0.0)
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let stderr = (var / n as f64).sqrt();
            let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
                .expect("positive degrees of freedom")
                .inverse_cdf(0.975);
            (stderr, t * stderr)
        };
        report.rows.push(AggregateRow {
            scheduler: mode,
            snr_db: snr,
            mean_se: mean,
            stderr_se: stderr,
            ci95_lo: mean - half,
            ci95_hi: mean + half,
            n,
        });
    }
    report
}

/// Scientific notation with 17 significant digits, enough to round-trip any f64.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_float(field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::Config(format!("bad number {field:?}: {e}")))
}

fn parse_int<T: std::str::FromStr>(field: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    field
        .trim()
        .parse::<T>()
        .map_err(|e| Error::Config(format!("bad integer {field:?}: {e}")))
}

pub fn write_raw_csv(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(RAW_HEADER).map_err(|e| Error::csv(path, e))?;
    for r in records {
        w.write_record([
            r.scheduler.name().to_string(),
            format_float(r.snr_db),
            r.realization.to_string(),
            r.seed.to_string(),
            format_float(r.sum_se),
            r.n_scheduled.to_string(),
            r.n_candidates.to_string(),
            format_float(r.prelog),
            format_float(r.runtime_ms),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(AGGREGATE_HEADER).map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.write_record([
            r.scheduler.name().to_string(),
            format_float(r.snr_db),
            format_float(r.mean_se),
            format_float(r.stderr_se),
            format_float(r.ci95_lo),
            format_float(r.ci95_hi),
            r.n.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let found = r.headers().map_err(|e| Error::csv(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Config(format!(
            "{}: header {:?} does not match {:?}",
            path.display(),
            found.iter().collect::<Vec<_>>(),
            header
        )));
    }
    r.records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::csv(path, e))
}

pub fn read_raw_csv(path: &Path) -> Result<Vec<ExperimentRecord>> {
    read_rows(path, &RAW_HEADER)?
        .iter()
        .map(|row| {
            Ok(ExperimentRecord {
                scheduler: row[0].parse()?,
                snr_db: parse_float(&row[1])?,
                realization: parse_int(&row[2])?,
                seed: parse_int(&row[3])?,
                sum_se: parse_float(&row[4])?,
                n_scheduled: parse_int(&row[5])?,
                n_candidates: parse_int(&row[6])?,
                prelog: parse_float(&row[7])?,
                runtime_ms: parse_float(&row[8])?,
            })
        })
        .collect()
}

pub fn read_aggregate_csv(path: &Path) -> Result<Vec<AggregateRow>> {
    read_rows(path, &AGGREGATE_HEADER)?
        .iter()
        .map(|row| {
            Ok(AggregateRow {
                scheduler: row[0].parse()?,
                snr_db: parse_float(&row[1])?,
                mean_se: parse_float(&row[2])?,
                stderr_se: parse_float(&row[3])?,
                ci95_lo: parse_float(&row[4])?,
                ci95_hi: parse_float(&row[5])?,
                n: parse_int(&row[6])?,
            })
        })
        .collect()
}

/// Progress callback of [`run_sweep_to_dir`]: (variant label, finished, total).
pub type LabelledProgress = dyn Fn(&str, usize, usize) + Sync;

/// Files written for one variant of a sweep.
#[derive(Debug, Clone)]
pub struct SweepFiles {
    pub label: Option<String>,
    pub raw: PathBuf,
    pub aggregate: PathBuf,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

/// Runs the base configuration (no variants) or each variant and writes
/// `raw[_label].csv` and `aggregate[_label].csv` into `out_dir`.
pub fn run_sweep_to_dir(
    config: &SimConfig,
    out_dir: &Path,
    progress: Option<&LabelledProgress>,
) -> Result<Vec<SweepFiles>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let jobs: Vec<(Option<String>, SimConfig)> = if config.sweep.variants.is_empty() {
        vec![(None, config.clone())]
    } else {
        config
            .sweep
            .variants
            .iter()
            .map(|v| Ok((Some(v.label.clone()), config.with_overrides(&v.set)?)))
            .collect::<Result<_>>()?
    };
    let mut files = Vec::new();
    for (label, cfg) in jobs {
        let name = label.clone().unwrap_or_default();
        let report = |done: usize, total: usize| {
            if let Some(p) = progress {
                p(&name, done, total);
            }
        };
        let output = snr_sweep(&cfg, Some(&report))?;
        let suffix = label.as_ref().map(|l| format!("_{l}")).unwrap_or_default();
        let raw = out_dir.join(format!("raw{suffix}.csv"));
        let agg_path = out_dir.join(format!("aggregate{suffix}.csv"));
        let agg = aggregate(&output.records);
        write_raw_csv(&raw, &output.records)?;
        write_aggregate_csv(&agg_path, &agg.rows)?;
        files.push(SweepFiles {
            label,
            raw,
            aggregate: agg_path,
            failures: output.failures,
            warnings: agg.warnings,
        });
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(mode: SchedulerMode, snr: f64, i: usize, se: f64) -> ExperimentRecord {
        ExperimentRecord {
            scheduler: mode,
            snr_db: snr,
            realization: i,
            seed: i as u64,
            sum_se: se,
            n_scheduled: 3,
            n_candidates: 2,
            prelog: 1.0,
            runtime_ms: 0.0,
        }
    }

    #[test]
    fn aggregate_matches_hand_computation() {
        let rs: Vec<_> = [1.0, 2.0, 4.0, f64::NAN]
            .iter()
            .enumerate()
            .map(|(i, &v)| record(SchedulerMode::Isp, 10.0, i, v))
            .collect();
        let a = aggregate(&rs);
        let row = &a.rows[0];
        assert_eq!(row.n, 3);
        assert!((row.mean_se - 7.0 / 3.0).abs() < 1e-14);
        // sample variance 7/3, stderr sqrt(7/9); t(0.975, 2) = 4.302652729911275
        let stderr = (7.0f64 / 9.0).sqrt();
        assert!((row.stderr_se - stderr).abs() < 1e-14);
        assert!((row.ci95_hi - row.mean_se - 4.302_652_729_696_142 * stderr).abs() < 1e-9);
    }

    #[test]
    fn single_realization_warns() {
        let a = aggregate(&[record(SchedulerMode::SusK, 0.0, 0, 5.0)]);
        assert_eq!(a.rows[0].stderr_se, 0.0);
        assert_eq!(a.warnings.len(), 1);
    }

    #[test]
    fn floats_keep_fifteen_digits() {
        let x = 12.345_678_901_234_5;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), 12.345_678_901_234_5);
        assert_eq!(format_float(f64::NAN), "NaN");
    }
}
