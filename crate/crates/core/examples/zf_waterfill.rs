//! Zero-forcing directions and waterfilled powers for a fixed user set, and
//! the rates they give on the design channels and on perturbed channels.
//!
//! `cargo run --example zf_waterfill`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xlmimo::linalg::{complex_gaussian, CVector};
use xlmimo::precoding::{sum_se, zf_waterfill};

pub fn run() -> xlmimo::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let channels: Vec<CVector> = (0..4).map(|_| complex_gaussian(&mut rng, 8)).collect();
    let users = [0, 1, 2, 3];
    let design: Vec<&CVector> = channels.iter().collect();
    let noise = 0.05;
    let set = zf_waterfill(&design, &users, 1.0, noise, 1.0)?;
    for (i, f) in set.directions.iter().enumerate() {
        let leak = (0..4)
            .filter(|&k| k != i)
            .map(|k| f.dotc(&channels[k]).norm())
            .fold(0.0, f64::max);
        println!(
            "user {i}: power {:.4}, |f^H h| {:.4}, max leakage {leak:.1e}",
            set.powers[i],
            f.dotc(&channels[i]).norm()
        );
    }
    let exact = sum_se(&set, &design, noise)?;
    println!("sum SE on design channels: {:.3} bits/s/Hz", exact.sum);

    let perturbed: Vec<CVector> = channels
        .iter()
        .map(|h| h + complex_gaussian(&mut rng, 8).scale(0.1))
        .collect();
    let refs: Vec<&CVector> = perturbed.iter().collect();
    println!(
        "sum SE with 10% channel error: {:.3} bits/s/Hz",
        sum_se(&set, &refs, noise)?.sum
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> xlmimo::Result<()> {
    run()
}
