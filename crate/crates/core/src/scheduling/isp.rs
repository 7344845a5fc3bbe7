//! Greedy scheduler driven by equivalent channel gains.
//!
//! Each user starts from its long-term gain. After a user is accepted, the
//! gains of the others shrink by the energy their covariance puts on the new
//! precoding direction. Gains only ever decrease, so a stale gain is an upper
//! bound and only the current leader needs refreshing.

use crate::channel::equivalent_gains;
use crate::error::{Error, Result};
use crate::linalg::{quadratic_form, CVector};
use crate::precoding::{sum_se, zf_waterfill, PrecoderSet};
use crate::scenario::{Scenario, UserModel};

use super::{candidate_count, candidate_set, CandidatePolicy, ScheduleResult, TrainingSection};

/// Knobs shared by every call of [`isp_schedule`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IspContext {
    pub total_power: f64,
    pub noise_power: f64,
    pub training: TrainingSection,
    pub overhead_aware: bool,
    pub candidates: CandidatePolicy,
}

/// Energy one precoding direction removes from a user's gain.
fn direction_penalty(user: &UserModel, direction: &CVector) -> f64 {
    let specular: f64 = user.responses.iter().map(|h| direction.dotc(h).norm_sqr()).sum();
    let diffuse = if user.correlation.is_zero() {
        0.0
    } else {
        quadratic_form(&user.correlation.matrix, direction)
    };
    specular + diffuse
}

/// `g - sum_i [sum_s |f_i^H hbar_s|^2 + f_i^H R f_i]` over the accumulated
/// directions.
pub fn update_equivalent_gain(user: &UserModel, base_gain: f64, directions: &[CVector]) -> f64 {
    base_gain - directions.iter().map(|f| direction_penalty(user, f)).sum::<f64>()
}

/// Bookkeeping for the lazily refreshed gains.
struct LazyGains<'a> {
    scenario: &'a Scenario,
    base: Vec<f64>,
    current: Vec<f64>,
    penalty: Vec<f64>,
    /// Number of accumulated directions already folded into `penalty[k]`.
    applied: Vec<usize>,
}

impl<'a> LazyGains<'a> {
    fn new(scenario: &'a Scenario) -> Self {
        let base = equivalent_gains(scenario);
        let k = base.len();
        Self {
            scenario,
            current: base.clone(),
            base,
            penalty: vec![0.0; k],
            applied: vec![0; k],
        }
    }

    fn refresh(&mut self, k: usize, directions: &[CVector]) {
        let user = self.scenario.user(k);
        for f in &directions[self.applied[k]..] {
            self.penalty[k] += direction_penalty(user, f);
        }
        self.applied[k] = directions.len();
        self.current[k] = self.base[k] - self.penalty[k];
    }

    fn leader(&self, open: &[bool]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (k, _) in open.iter().enumerate().filter(|(_, &o)| o) {
            match best {
                Some(b) if self.current[k] <= self.current[b] => {}
                _ => best = Some(k),
            }
        }
        best
    }

    /// Leader after refreshing until the refreshed leader stays on top.
    fn refreshed_leader(&mut self, open: &[bool], directions: &[CVector]) -> Option<usize> {
        loop {
            let k = self.leader(open)?;
            if self.applied[k] == directions.len() {
                return Some(k);
            }
            self.refresh(k, directions);
            if self.leader(open) == Some(k) {
                return Some(k);
            }
        }
    }
}

fn metric_prelog(ctx: &IspContext, base: &[f64], tentative: &[usize]) -> Result<f64> {
    if !ctx.overhead_aware {
        return Ok(1.0);
    }
    let extra = candidate_count(base, tentative, ctx.candidates);
    ctx.training.prelog(tentative.len() + extra)
}

/// Greedy user selection on `channels` (one per user, typically outdated
/// estimates).
///
/// Users are picked in order of refreshed equivalent gain (ties: lowest id).
/// A pick is kept only if it raises the internal sum-rate metric, computed
/// with ZF and waterfilling on `channels`; the loop also stops once every user
/// or `M` users are scheduled. Candidates for the next block follow from the
/// long-term gains.
pub fn isp_schedule(scenario: &Scenario, channels: &[CVector], ctx: &IspContext) -> Result<ScheduleResult> {
    let num_users = scenario.num_users();
    if channels.len() != num_users {
        return Err(Error::Domain(format!(
            "{} channels for {num_users} users",
            channels.len()
        )));
    }
    let max_users = num_users.min(scenario.num_antennas());
    let mut gains = LazyGains::new(scenario);
    let mut open = vec![true; num_users];
    let mut directions: Vec<CVector> = Vec::new();
    let mut scheduled: Vec<usize> = Vec::new();
    let mut accepted: Option<PrecoderSet> = None;
    let mut metric_trace = Vec::new();
    let mut gain_history = Vec::new();
    let mut singular_rejections = Vec::new();
    let mut rejected_metric = None;
    let mut previous = f64::NEG_INFINITY;

    while scheduled.len() < max_users {
        let Some(k) = gains.refreshed_leader(&open, &directions) else {
            break;
        };
        let mut tentative = scheduled.clone();
        tentative.push(k);
        let prelog = match metric_prelog(ctx, &gains.base, &tentative) {
            Ok(p) => p,
            Err(e) if scheduled.is_empty() => return Err(e),
            Err(_) => break,
        };
        let design: Vec<&CVector> = tentative.iter().map(|&u| &channels[u]).collect();
        let set = match zf_waterfill(&design, &tentative, ctx.total_power, ctx.noise_power, prelog) {
            Ok(set) => set,
            Err(Error::Singular { .. }) => {
                open[k] = false;
                singular_rejections.push(k);
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
        open[k] = false;
        scheduled.push(k);
        directions.push(set.directions.last().expect("non-empty set").clone());
        metric_trace.push(metric);
        gain_history.push(gains.current[k]);
        accepted = Some(set);
    }

    let Some(mut precoders) = accepted else {
        return Err(Error::Domain("no user could be scheduled".into()));
    };
    let candidates = candidate_set(&gains.base, &scheduled, ctx.candidates);
    let prelog = if ctx.overhead_aware {
        ctx.training.prelog(scheduled.len() + candidates.len())?
    } else {
        1.0
    };
    precoders.prelog = prelog;
    Ok(ScheduleResult {
        scheduled,
        candidates,
        precoders,
        metric_trace,
        rejected_metric,
        singular_rejections,
        gain_history,
        prelog,
    })
}
