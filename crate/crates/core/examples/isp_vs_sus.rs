//! The equivalent-gain scheduler against semi-orthogonal user selection on
//! the same channels, with training overhead charged.
//!
//! `cargo run --example isp_vs_sus`

use xlmimo::channel::draw_channel;
use xlmimo::precoding::sum_se;
use xlmimo::rng::{substream, Stream};
use xlmimo::scenario::{build_scenario, ScenarioConfig};
use xlmimo::scheduling::{isp_schedule, sus_schedule, CandidatePolicy, IspContext, SusContext, TrainingSection};

pub fn run() -> xlmimo::Result<()> {
    let config = ScenarioConfig {
        num_antennas: 32,
        num_users: 40,
        ..ScenarioConfig::default()
    };
    let scenario = build_scenario(&config, 9)?;
    let channels: Vec<_> = scenario
        .users
        .iter()
        .enumerate()
        .map(|(k, u)| draw_channel(u, &mut substream(9, Stream::SpecularPhases, k)))
        .collect();
    let noise = config.noise_power_at(15.0);
    let training = TrainingSection {
        block_length: 10_000.0,
        per_user_cost: 70.0,
    };

    let isp = isp_schedule(
        &scenario,
        &channels,
        &IspContext {
            total_power: 1.0,
            noise_power: noise,
            training,
            overhead_aware: true,
            candidates: CandidatePolicy::Fixed { size: 15 },
        },
    )?;
    let design: Vec<_> = isp.scheduled.iter().map(|&k| &channels[k]).collect();
    println!(
        "ISP:   {} users, {} candidates, pre-log {:.3}, sum SE {:.2}",
        isp.scheduled.len(),
        isp.candidates.len(),
        isp.prelog,
        sum_se(&isp.precoders, &design, noise)?.sum
    );
    println!(
        "       metric per iteration: {:?}",
        isp.metric_trace
            .iter()
            .map(|m| (m * 10.0).round() / 10.0)
            .collect::<Vec<_>>()
    );

    let sus = sus_schedule(
        &channels,
        &SusContext {
            total_power: 1.0,
            noise_power: noise,
            threshold: 0.3,
            max_users: 32,
        },
    )?;
    let mut set = sus.precoders.clone();
    set.prelog = training.prelog(scenario.num_users())?;
    let design: Vec<_> = sus.scheduled.iter().map(|&k| &channels[k]).collect();
    println!(
        "SUS-K: {} users, pre-log {:.3}, sum SE {:.2}",
        sus.scheduled.len(),
        set.prelog,
        sum_se(&set, &design, noise)?.sum
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> xlmimo::Result<()> {
    run()
}
