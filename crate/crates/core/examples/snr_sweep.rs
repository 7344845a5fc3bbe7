//! A small Monte Carlo sweep with two variants, written to CSV and read back.
//!
//! `cargo run --example snr_sweep [out_dir]`

use std::path::PathBuf;

use xlmimo::experiment::{read_aggregate_csv, run_sweep_to_dir};
use xlmimo::SimConfig;

pub fn run_in(out: PathBuf) -> xlmimo::Result<()> {
    let config = SimConfig::from_toml(
        r#"
        seed = 11
        [scenario]
        num_antennas = 16
        num_users = 12
        [scheduler]
        modes = ["PERFECT", "ISP", "SUS-S"]
        [sweep]
        snr_db = [0, 10, 20]
        realizations = 8
        variants = [
            { label = "kappa2", set = ["scenario.power_ratio=2"] },
            { label = "kappa8", set = ["scenario.power_ratio=8"] },
        ]
        "#,
        &[],
    )?;
    for files in run_sweep_to_dir(&config, &out, None)? {
        println!("{}", files.label.as_deref().unwrap_or("base"));
        for row in read_aggregate_csv(&files.aggregate)? {
            println!(
                "  {:<8} {:>4} dB  {:>7.2} [{:.2}, {:.2}]",
                row.scheduler.name(),
                row.snr_db,
                row.mean_se,
                row.ci95_lo,
                row.ci95_hi
            );
        }
    }
    println!("CSV files in {}", out.display());
    Ok(())
}

pub fn run() -> xlmimo::Result<()> {
    run_in(std::env::temp_dir().join("xlmimo_snr_sweep"))
}

#[allow(dead_code)]
fn main() -> xlmimo::Result<()> {
    match std::env::args().nth(1) {
        Some(dir) => run_in(PathBuf::from(dir)),
        None => run(),
    }
}
