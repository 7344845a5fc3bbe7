//! Semi-orthogonal user selection on instantaneous channels.

use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::precoding::{sum_se, zf_waterfill, PrecoderSet};

use super::ScheduleResult;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusContext {
    pub total_power: f64,
    pub noise_power: f64,
    /// Users whose normalised correlation with the last pick reaches this
    /// value leave the pool.
    pub threshold: f64,
    /// Upper bound on the number of scheduled users, normally `M`.
    pub max_users: usize,
}

/// Picks, among the pool, the user with the largest channel component
/// orthogonal to those already picked, then prunes users that are not
/// semi-orthogonal to it. Stops when the pool empties, `max_users` is reached
/// or the sum rate (pre-log 1) stops increasing.
pub fn sus_schedule(channels: &[CVector], ctx: &SusContext) -> Result<ScheduleResult> {
    if channels.is_empty() {
        return Err(Error::Domain("no users to schedule".into()));
    }
    if !(ctx.threshold > 0.0 && ctx.threshold < 1.0) {
        return Err(Error::Config(format!(
            "sus threshold {} must lie in (0, 1)",
            ctx.threshold
        )));
    }
    let mut pool: Vec<usize> = (0..channels.len()).collect();
    let mut orthogonal: Vec<CVector> = channels.to_vec();
    let mut scheduled: Vec<usize> = Vec::new();
    let mut accepted: Option<PrecoderSet> = None;
    let mut metric_trace = Vec::new();
    let mut gain_history = Vec::new();
    let mut singular_rejections = Vec::new();
    let mut rejected_metric = None;
    let mut previous = f64::NEG_INFINITY;

    while !pool.is_empty() && scheduled.len() < ctx.max_users {
        let mut pick = pool[0];
        for &k in &pool[1..] {
            if orthogonal[k].norm_squared() > orthogonal[pick].norm_squared() {
                pick = k;
            }
        }
        let mut tentative = scheduled.clone();
        tentative.push(pick);
        let design: Vec<&CVector> = tentative.iter().map(|&u| &channels[u]).collect();
        let set = match zf_waterfill(&design, &tentative, ctx.total_power, ctx.noise_power, 1.0) {
            Ok(set) => set,
            Err(Error::Singular { .. }) => {
                pool.retain(|&k| k != pick);
                singular_rejections.push(pick);
                continue;
            }
            Err(e) => return Err(e),
        };
        let metric = sum_se(&set, &design, ctx.noise_power)?.sum;
        if metric <= previous {
            rejected_metric = Some(metric);
            break;
        }
        previous = metric;
        scheduled.push(pick);
        metric_trace.push(metric);
        gain_history.push(orthogonal[pick].norm_squared());
        accepted = Some(set);

        let basis = orthogonal[pick].clone();
        let basis_norm = basis.norm();
        pool.retain(|&k| {
            k != pick && {
                let h = &channels[k];
                basis.dotc(h).norm() < ctx.threshold * h.norm() * basis_norm
            }
        });
        let basis_energy = basis.norm_squared();
        if basis_energy > 0.0 {
            for &k in &pool {
                let coeff = basis.dotc(&orthogonal[k]) / basis_energy;
                orthogonal[k] -= &basis * coeff;
            }
        }
    }

    let Some(precoders) = accepted else {
        return Err(Error::Domain("no user could be scheduled".into()));
    };
    Ok(ScheduleResult {
        scheduled,
        candidates: Vec::new(),
        precoders,
        metric_trace,
        rejected_metric,
        singular_rejections,
        gain_history,
        prelog: 1.0,
    })
}
