//! User scheduling: the imperfect-CSI greedy scheduler with lazy gain
//! refreshes, the semi-orthogonal user selection baselines and the
//! two-block training/transmission pipeline that evaluates them.

mod isp;
mod pipeline;
mod sus;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precoding::PrecoderSet;

pub use isp::{isp_schedule, update_equivalent_gain, IspContext};
pub use pipeline::{
    draw_realization, evaluate_modes, run_block_pipeline, BlockContext, ChannelRealization, ModeOutcome,
};
pub use sus::{sus_schedule, SusContext};

/// Which scheduler/precoder combination a pipeline run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchedulerMode {
    /// Scheduling on outdated estimates, ZF on fresh estimates of `S`.
    #[serde(rename = "ISP")]
    Isp,
    /// Same schedule as `Isp`, ZF on the true channels.
    #[serde(rename = "ISP-P")]
    IspP,
    /// Semi-orthogonal selection; every user is trained.
    #[serde(rename = "SUS-K")]
    SusK,
    /// Semi-orthogonal selection; only the scheduled users pay for training.
    #[serde(rename = "SUS-S")]
    SusS,
    /// Greedy scheduling and ZF on the true channels, no training cost.
    #[serde(rename = "PERFECT")]
    Perfect,
}

impl SchedulerMode {
    pub const ALL: [SchedulerMode; 5] = [
        SchedulerMode::Isp,
        SchedulerMode::IspP,
        SchedulerMode::SusK,
        SchedulerMode::SusS,
        SchedulerMode::Perfect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerMode::Isp => "ISP",
            SchedulerMode::IspP => "ISP-P",
            SchedulerMode::SusK => "SUS-K",
            SchedulerMode::SusS => "SUS-S",
            SchedulerMode::Perfect => "PERFECT",
        }
    }
}

impl fmt::Display for SchedulerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchedulerMode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown scheduler mode {s:?}")))
    }
}

/// How the non-scheduled users trained for the next block are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CandidatePolicy {
    /// Every remaining user with `g_k >= nu`.
    Threshold { nu: f64 },
    /// The `size` remaining users with the largest `g_k`.
    Fixed { size: usize },
}

impl Default for CandidatePolicy {
    fn default() -> Self {
        CandidatePolicy::Fixed { size: 15 }
    }
}

/// `[training]` section: pilot cost bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    /// Coherence block length `tau_c`, channel uses.
    pub block_length: f64,
    /// Channel uses needed to train one user.
    pub per_user_cost: f64,
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            block_length: 10_000.0,
            per_user_cost: 30.0,
        }
    }
}

impl TrainingSection {
    pub fn validate(&self) -> Result<()> {
        if !(self.block_length > 0.0 && self.per_user_cost > 0.0) {
            return Err(Error::Config("block_length and per_user_cost must be positive".into()));
        }
        if self.per_user_cost >= self.block_length {
            return Err(Error::Config(format!(
                "training one user ({}) already exhausts the block ({})",
                self.per_user_cost, self.block_length
            )));
        }
        Ok(())
    }

    pub fn prelog(&self, trained: usize) -> Result<f64> {
        prelog_factor(self.block_length, self.per_user_cost, trained)
    }
}

/// `[scheduler]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerConfig {
    pub modes: Vec<SchedulerMode>,
    pub candidates: CandidatePolicy,
    /// Charge training time in the pre-log factor.
    pub overhead_aware: bool,
    /// Semi-orthogonality threshold of the SUS baselines, in `(0, 1)`.
    pub sus_threshold: f64,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            modes: vec![SchedulerMode::Isp],
            candidates: CandidatePolicy::default(),
            overhead_aware: false,
            sus_threshold: 0.3,
        }
    }
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::Config("scheduler.modes must not be empty".into()));
        }
        if !(self.sus_threshold > 0.0 && self.sus_threshold < 1.0) {
            return Err(Error::Config(format!(
                "sus_threshold {} must lie in (0, 1)",
                self.sus_threshold
            )));
        }
        if let CandidatePolicy::Threshold { nu } = self.candidates {
            if !nu.is_finite() {
                return Err(Error::Config("candidate threshold must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Output of one scheduling pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleResult {
    /// Scheduled users in selection order.
    pub scheduled: Vec<usize>,
    /// Extra users trained for the next block; disjoint from `scheduled`.
    pub candidates: Vec<usize>,
    /// Precoders designed on the channels the scheduler was given.
    pub precoders: PrecoderSet,
    /// Internal metric after each accepted iteration.
    pub metric_trace: Vec<f64>,
    /// Metric of the last tried user, when it was discarded for not improving.
    pub rejected_metric: Option<f64>,
    /// Users skipped because adding them made the ZF problem singular.
    pub singular_rejections: Vec<usize>,
    /// Refreshed gain of each accepted user at the time it was picked.
    pub gain_history: Vec<f64>,
    /// Pre-log factor of the final set.
    pub prelog: f64,
}

/// `(tau_c - trained * tau_dot) / tau_c`.
pub fn prelog_factor(block_length: f64, per_user_cost: f64, trained: usize) -> Result<f64> {
    let used = trained as f64 * per_user_cost;
    if used >= block_length {
        return Err(Error::Domain(format!(
            "training {trained} users takes {used} channel uses, block has {block_length}"
        )));
    }
    Ok((block_length - used) / block_length)
}

/// Candidate users for the next training stage, sorted by decreasing gain
/// (ties: lowest id first).
pub fn candidate_set(gains: &[f64], scheduled: &[usize], policy: CandidatePolicy) -> Vec<usize> {
    let mut rest: Vec<usize> = (0..gains.len()).filter(|k| !scheduled.contains(k)).collect();
    rest.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));
    match policy {
        CandidatePolicy::Threshold { nu } => rest.into_iter().filter(|&k| gains[k] >= nu).collect(),
        CandidatePolicy::Fixed { size } => {
            rest.truncate(size);
            rest
        }
    }
}

/// Number of candidates the policy would add to a set of `scheduled` users.
pub(crate) fn candidate_count(gains: &[f64], scheduled: &[usize], policy: CandidatePolicy) -> usize {
    match policy {
        CandidatePolicy::Fixed { size } => size.min(gains.len() - scheduled.len()),
        CandidatePolicy::Threshold { .. } => candidate_set(gains, scheduled, policy).len(),
    }
}
