//! Two coherence blocks: outdated estimates in block 0, scheduling, channel
//! aging, fresh training of the selected users in block 1 and evaluation on
//! the true block-1 channels.
//!
//! Every random draw of a realization happens once in [`draw_realization`];
//! training noise is stored as unit-variance samples and scaled by the SNR
//! at evaluation time, so all modes and SNR points share the same channels.

use crate::channel::draw_channel;
use crate::csi::{
    estimate_channel_with, evolve_channel, innovation_factor, temporal_correlation, AgingModel, AgingSection,
};
use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, CVector};
use crate::precoding::{sum_se, zf_waterfill, PrecoderSet};
use crate::rng::{substream, Stream};
use crate::scenario::Scenario;

use super::{
    isp_schedule, sus_schedule, IspContext, ScheduleResult, SchedulerConfig, SchedulerMode, SusContext, TrainingSection,
};

/// True channels of both blocks and the unit training noise of every user.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub alpha: f64,
    pub previous: Vec<CVector>,
    pub current: Vec<CVector>,
    pub noise_previous: Vec<CVector>,
    pub noise_current: Vec<CVector>,
}

impl ChannelRealization {
    /// LS estimates at transmit-power-to-noise ratio `snr`.
    pub fn estimates(&self, block: usize, snr: f64) -> Vec<CVector> {
        let (h, w) = match block {
            0 => (&self.previous, &self.noise_previous),
            _ => (&self.current, &self.noise_current),
        };
        h.iter().zip(w).map(|(h, w)| estimate_channel_with(h, snr, w)).collect()
    }
}

/// Draws the block-0 channels, their aged block-1 versions and the training
/// noise from the substreams of `seed`.
pub fn draw_realization(scenario: &Scenario, aging: &AgingSection, seed: u64) -> Result<ChannelRealization> {
    let alpha = match aging.model {
        AgingModel::Ar1 => temporal_correlation(&aging.to_config(scenario.array.wavelength)?),
        AgingModel::BlockIndependent => 0.0,
    };
    let m = scenario.num_antennas();
    let mut previous = Vec::with_capacity(scenario.num_users());
    let mut current = Vec::with_capacity(scenario.num_users());
    let mut noise_previous = Vec::with_capacity(scenario.num_users());
    let mut noise_current = Vec::with_capacity(scenario.num_users());
    for (k, user) in scenario.users.iter().enumerate() {
        let h0 = draw_channel(user, &mut substream(seed, Stream::SpecularPhases, k));
        let h1 = match aging.model {
            AgingModel::Ar1 => evolve_channel(
                &h0,
                alpha,
                &innovation_factor(user),
                &mut substream(seed, Stream::Innovation, k),
            ),
            AgingModel::BlockIndependent => draw_channel(user, &mut substream(seed, Stream::Redraw, k)),
        };
        let mut noise = substream(seed, Stream::TrainingNoise, k);
        noise_previous.push(complex_gaussian(&mut noise, m));
        noise_current.push(complex_gaussian(&mut noise, m));
        previous.push(h0);
        current.push(h1);
    }
    Ok(ChannelRealization {
        alpha,
        previous,
        current,
        noise_previous,
        noise_current,
    })
}

/// Everything a pipeline run needs besides the scenario and the channels.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockContext {
    pub total_power: f64,
    pub noise_power: f64,
    pub training: TrainingSection,
    pub scheduler: SchedulerConfig,
}

impl BlockContext {
    fn snr(&self) -> f64 {
        self.total_power / self.noise_power
    }

    fn isp(&self, overhead_aware: bool) -> IspContext {
        IspContext {
            total_power: self.total_power,
            noise_power: self.noise_power,
            training: self.training,
            overhead_aware,
            candidates: self.scheduler.candidates,
        }
    }
}

/// Performance of one mode on one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOutcome {
    pub mode: SchedulerMode,
    pub scheduled: Vec<usize>,
    pub candidates: Vec<usize>,
    pub prelog: f64,
    /// Rates on the true block-1 channels, pre-log included.
    pub per_user_se: Vec<f64>,
    pub sum_se: f64,
    pub schedule: ScheduleResult,
}

fn evaluate_on_truth(
    realization: &ChannelRealization,
    design: &[CVector],
    users: &[usize],
    ctx: &BlockContext,
    prelog: f64,
) -> Result<(PrecoderSet, Vec<f64>, f64)> {
    let design: Vec<&CVector> = users.iter().map(|&k| &design[k]).collect();
    let set = zf_waterfill(&design, users, ctx.total_power, ctx.noise_power, prelog)?;
    let truth: Vec<&CVector> = users.iter().map(|&k| &realization.current[k]).collect();
    let report = sum_se(&set, &truth, ctx.noise_power)?;
    Ok((set, report.per_user, report.sum))
}

fn outcome(
    mode: SchedulerMode,
    schedule: ScheduleResult,
    candidates: Vec<usize>,
    prelog: f64,
    evaluated: (PrecoderSet, Vec<f64>, f64),
) -> ModeOutcome {
    ModeOutcome {
        mode,
        scheduled: schedule.scheduled.clone(),
        candidates,
        prelog,
        per_user_se: evaluated.1,
        sum_se: evaluated.2,
        schedule,
    }
}

/// Evaluates each requested mode on one realization. Modes fail
/// independently.
pub fn evaluate_modes(
    scenario: &Scenario,
    realization: &ChannelRealization,
    ctx: &BlockContext,
    modes: &[SchedulerMode],
) -> Vec<(SchedulerMode, Result<ModeOutcome>)> {
    let snr = ctx.snr();
    let outdated = realization.estimates(0, snr);
    let fresh = realization.estimates(1, snr);
    let overhead = ctx.scheduler.overhead_aware;
    let needs_isp = modes
        .iter()
        .any(|m| matches!(m, SchedulerMode::Isp | SchedulerMode::IspP));
    let needs_sus = modes
        .iter()
        .any(|m| matches!(m, SchedulerMode::SusK | SchedulerMode::SusS));
    let isp = needs_isp.then(|| isp_schedule(scenario, &outdated, &ctx.isp(overhead)));
    let sus = needs_sus.then(|| {
        sus_schedule(
            &fresh,
            &SusContext {
                total_power: ctx.total_power,
                noise_power: ctx.noise_power,
                threshold: ctx.scheduler.sus_threshold,
                max_users: scenario.num_antennas(),
            },
        )
    });

    let share = |r: &Option<Result<ScheduleResult>>| -> Result<ScheduleResult> {
        match r.as_ref().expect("computed above") {
            Ok(s) => Ok(s.clone()),
            Err(e) => Err(Error::Domain(format!("scheduling failed: {e}"))),
        }
    };
    let prelog_or_one = |trained: usize| -> Result<f64> {
        if overhead {
            ctx.training.prelog(trained)
        } else {
            Ok(1.0)
        }
    };

    modes
        .iter()
        .map(|&mode| {
            let result = (|| -> Result<ModeOutcome> {
                match mode {
                    SchedulerMode::Isp | SchedulerMode::IspP => {
                        let schedule = share(&isp)?;
                        let trained = schedule.scheduled.len() + schedule.candidates.len();
                        let prelog = prelog_or_one(trained)?;
                        let design = if mode == SchedulerMode::Isp {
                            &fresh
                        } else {
                            &realization.current
                        };
                        let evaluated = evaluate_on_truth(realization, design, &schedule.scheduled, ctx, prelog)?;
                        let candidates = schedule.candidates.clone();
                        Ok(outcome(mode, schedule, candidates, prelog, evaluated))
                    }
                    SchedulerMode::SusK | SchedulerMode::SusS => {
                        let schedule = share(&sus)?;
                        let trained = if mode == SchedulerMode::SusK {
                            scenario.num_users()
                        } else {
                            schedule.scheduled.len()
                        };
                        let prelog = prelog_or_one(trained)?;
                        let evaluated = evaluate_on_truth(realization, &fresh, &schedule.scheduled, ctx, prelog)?;
                        Ok(outcome(mode, schedule, Vec::new(), prelog, evaluated))
                    }
                    SchedulerMode::Perfect => {
                        let schedule = isp_schedule(scenario, &realization.current, &ctx.isp(false))?;
                        let evaluated =
                            evaluate_on_truth(realization, &realization.current, &schedule.scheduled, ctx, 1.0)?;
                        Ok(outcome(mode, schedule, Vec::new(), 1.0, evaluated))
                    }
                }
            })();
            (mode, result)
        })
        .collect()
}

/// Draws one realization from `seed` and evaluates every configured mode.
pub fn run_block_pipeline(
    scenario: &Scenario,
    aging: &AgingSection,
    ctx: &BlockContext,
    seed: u64,
) -> Result<Vec<(SchedulerMode, Result<ModeOutcome>)>> {
    let realization = draw_realization(scenario, aging, seed)?;
    Ok(evaluate_modes(scenario, &realization, ctx, &ctx.scheduler.modes))
}
