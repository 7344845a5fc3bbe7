#![allow(dead_code)]

use xlmimo::channel::{draw_channel, equivalent_gains};
use xlmimo::linalg::CVector;
use xlmimo::precoding::{sum_se, zf_waterfill};
use xlmimo::rng::{substream, Stream};
use xlmimo::scenario::{build_scenario, Scenario, ScenarioConfig};
use xlmimo::scheduling::{update_equivalent_gain, IspContext};
use xlmimo::Error;

pub fn small_config(num_antennas: usize, num_users: usize) -> ScenarioConfig {
    ScenarioConfig {
        num_antennas,
        num_users,
        ..ScenarioConfig::default()
    }
}

pub fn scenario(num_antennas: usize, num_users: usize, seed: u64) -> Scenario {
    build_scenario(&small_config(num_antennas, num_users), seed).unwrap()
}

pub fn channels(scenario: &Scenario, seed: u64) -> Vec<CVector> {
    scenario
        .users
        .iter()
        .enumerate()
        .map(|(k, u)| draw_channel(u, &mut substream(seed, Stream::SpecularPhases, k)))
        .collect()
}

/// Sum SE of ZF + waterfilling on `channels` restricted to `users`, or `None`
/// when the subset is singular.
pub fn subset_se(channels: &[CVector], users: &[usize], total_power: f64, noise_power: f64) -> Option<f64> {
    let design: Vec<&CVector> = users.iter().map(|&k| &channels[k]).collect();
    match zf_waterfill(&design, users, total_power, noise_power, 1.0) {
        Ok(set) => Some(sum_se(&set, &design, noise_power).unwrap().sum),
        Err(Error::Singular { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

/// Best subset over every non-empty subset of at most `max_users` users.
pub fn brute_force_best(
    channels: &[CVector],
    max_users: usize,
    total_power: f64,
    noise_power: f64,
) -> (Vec<usize>, f64) {
    let k = channels.len();
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    for mask in 1u32..(1 << k) {
        let users: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        if users.len() > max_users {
            continue;
        }
        if let Some(se) = subset_se(channels, &users, total_power, noise_power) {
            if se > best.1 {
                best = (users, se);
            }
        }
    }
    best
}

/// The greedy loop with every unscheduled gain refreshed against all
/// accumulated directions at every iteration (no laziness). Overhead off.
pub fn fully_refreshed_greedy(scenario: &Scenario, channels: &[CVector], ctx: &IspContext) -> Vec<usize> {
    assert!(!ctx.overhead_aware);
    let base = equivalent_gains(scenario);
    let k = base.len();
    let max_users = k.min(scenario.num_antennas());
    let mut open = vec![true; k];
    let mut directions: Vec<CVector> = Vec::new();
    let mut scheduled = Vec::new();
    let mut previous = f64::NEG_INFINITY;
    while scheduled.len() < max_users {
        let mut pick: Option<(usize, f64)> = None;
        for u in (0..k).filter(|&u| open[u]) {
            let g = update_equivalent_gain(scenario.user(u), base[u], &directions);
            if pick.is_none_or(|(_, best)| g > best) {
                pick = Some((u, g));
            }
        }
        let Some((u, _)) = pick else { break };
        let mut tentative = scheduled.clone();
        tentative.push(u);
        let design: Vec<&CVector> = tentative.iter().map(|&i| &channels[i]).collect();
        let set = match zf_waterfill(&design, &tentative, ctx.total_power, ctx.noise_power, 1.0) {
            Ok(set) => set,
            Err(Error::Singular { .. }) => {
                open[u] = false;
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        let metric = sum_se(&set, &design, ctx.noise_power).unwrap().sum;
        if metric <= previous {
            break;
        }
        previous = metric;
        open[u] = false;
        scheduled.push(u);
        directions.push(set.directions.last().unwrap().clone());
    }
    scheduled
}

/// The small-instance suite: every (K, M, SNR) combination over twelve seeds,
/// 324 instances with `K <= 6`, `M <= 8`. `noise_at` maps SNR dB to noise power.
pub fn small_instances(noise_at: fn(f64) -> f64) -> Vec<(Scenario, Vec<CVector>, f64)> {
    let mut out = Vec::new();
    for seed in 0..12u64 {
        for k in [4usize, 5, 6] {
            for m in [4usize, 6, 8] {
                let scenario = scenario(m, k, 1000 + seed);
                let channels = channels(&scenario, 5000 + seed);
                for snr in [0.0, 10.0, 20.0] {
                    out.push((scenario.clone(), channels.clone(), noise_at(snr)));
                }
            }
        }
    }
    out
}
