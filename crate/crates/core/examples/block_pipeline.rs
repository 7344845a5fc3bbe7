//! One realization of the two-block pipeline: schedule on outdated
//! estimates, age the channels, retrain and evaluate every mode.
//!
//! `cargo run --example block_pipeline`

use xlmimo::scenario::build_scenario;
use xlmimo::scheduling::{run_block_pipeline, SchedulerMode};
use xlmimo::SimConfig;

pub fn run() -> xlmimo::Result<()> {
    let config = SimConfig::from_toml(
        r#"
        [scenario]
        num_antennas = 32
        num_users = 30
        [aging]
        csi_delay = 2000
        [scheduler]
        overhead_aware = true
        "#,
        &[],
    )?;
    let mut ctx = config.block_context(20.0);
    ctx.scheduler.modes = SchedulerMode::ALL.to_vec();
    let scenario = build_scenario(&config.scenario, 1)?;
    for (mode, outcome) in run_block_pipeline(&scenario, &config.aging, &ctx, 1)? {
        match outcome {
            Ok(o) => println!(
                "{:<8} |S| = {:>2}  pre-log {:.3}  sum SE {:>7.2}",
                mode.name(),
                o.scheduled.len(),
                o.prelog,
                o.sum_se
            ),
            Err(e) => println!("{:<8} failed: {e}", mode.name()),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> xlmimo::Result<()> {
    run()
}
