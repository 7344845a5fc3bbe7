//! Temporal correlation for several CSI delays and the resulting error
//! covariance of an aged, noisy estimate.
//!
//! `cargo run --example csi_aging`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xlmimo::channel::draw_channel;
use xlmimo::csi::{
    error_covariance, estimate_channel, evolve_channel, innovation_covariance, innovation_factor, temporal_correlation,
    AgingConfig,
};
use xlmimo::linalg::real_trace;
use xlmimo::scenario::{build_scenario, ScenarioConfig};

pub fn run() -> xlmimo::Result<()> {
    for delay in [500.0, 2_000.0, 5_000.0, 10_000.0] {
        let cfg = AgingConfig::new(30.0 / 3.6, 0.15, 1e6, delay)?;
        println!("delay {delay:>6} samples: alpha = {:+.6}", temporal_correlation(&cfg));
    }

    let config = ScenarioConfig {
        num_antennas: 16,
        num_users: 1,
        ..ScenarioConfig::default()
    };
    let scenario = build_scenario(&config, 3)?;
    let user = scenario.user(0);
    let factor = innovation_factor(user);
    let alpha = temporal_correlation(&AgingConfig::new(30.0 / 3.6, 0.15, 1e6, 2_000.0)?);
    let snr = 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trials = 5_000;
    let mut energy = 0.0;
    for _ in 0..trials {
        let h0 = draw_channel(user, &mut rng);
        let estimate = estimate_channel(&h0, snr, &mut rng)?;
        let h1 = evolve_channel(&h0, alpha, &factor, &mut rng);
        energy += (h1 - estimate.scale(alpha)).norm_squared();
    }
    let predicted = real_trace(&error_covariance(alpha, snr, &innovation_covariance(user)));
    println!(
        "error energy of alpha * estimate: simulated {:.3}, predicted {predicted:.3}",
        energy / trials as f64
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> xlmimo::Result<()> {
    run()
}
