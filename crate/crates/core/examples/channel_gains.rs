//! Draws a scenario and compares the empirical channel energy of each user
//! with the exact expectation and the equivalent gain used by the scheduler.
//!
//! `cargo run --example channel_gains`

use xlmimo::channel::{draw_channel, equivalent_gain, expected_gain_exact};
use xlmimo::rng::{substream, Stream};
use xlmimo::scenario::{build_scenario, ScenarioConfig};

pub fn run() -> xlmimo::Result<()> {
    let config = ScenarioConfig {
        num_antennas: 64,
        num_users: 6,
        ..ScenarioConfig::default()
    };
    let scenario = build_scenario(&config, 42)?;
    println!(
        "{:>4} {:>8} {:>8} {:>6} {:>10} {:>10} {:>10}",
        "user", "r (m)", "theta", "paths", "mc mean", "exact", "equiv"
    );
    for (k, user) in scenario.users.iter().enumerate() {
        let mut rng = substream(7, Stream::SpecularPhases, k);
        let draws = 2_000;
        let mean = (0..draws)
            .map(|_| draw_channel(user, &mut rng).norm_squared())
            .sum::<f64>()
            / draws as f64;
        println!(
            "{k:>4} {:>8.1} {:>8.3} {:>6} {:>10.3} {:>10.3} {:>10.3}",
            user.geometry.radius,
            user.geometry.angle,
            user.paths.len(),
            mean,
            expected_gain_exact(&scenario, k),
            equivalent_gain(&scenario, k)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> xlmimo::Result<()> {
    run()
}
