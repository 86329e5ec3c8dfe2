use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::model::{Phase, PhaseMark, SampledTrace, SummaryStat};
use crate::signal::{self, PhaseInferenceConfig};
use crate::stats::{self, BootstrapConfig};

/// One energy trial: a power or voltage/current trace, optional explicit
/// phase marks and the mass of the grasped object.
#[derive(Debug, Clone, Copy)]
pub struct EnergyTrialInput<'a> {
    pub trace: &'a SampledTrace,
    pub marks: Option<&'a [PhaseMark]>,
    pub mass_g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseEnergies {
    pub e_grasp: f64,
    pub e_hold: f64,
    pub e_release: f64,
    pub e_cycle: f64,
    pub hold_duration: f64,
    pub p_hold_mean: f64,
    pub e_hold10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyResult {
    pub per_trial: Vec<PhaseEnergies>,
    pub e_grasp: SummaryStat,
    pub e_hold: SummaryStat,
    pub e_release: SummaryStat,
    pub e_cycle: SummaryStat,
    /// Median over trials of the mean holding power, watts.
    pub p_hold_mean: f64,
    /// Ten-second holding energy, `10 · p_hold_mean`.
    pub e_hold10: f64,
    pub e_hold10_summary: SummaryStat,
    /// Median over trials of `E_cycle / mass`, J/g.
    pub energy_to_weight_cycle: f64,
    /// Median over trials of `E_grasp / mass`, J/g.
    pub energy_to_weight_grasp: f64,
    pub t_hold_nominal: Option<f64>,
}

fn find(marks: &[PhaseMark], phase: Phase) -> Result<PhaseMark, MetricsError> {
    marks
        .iter()
        .find(|m| m.phase == phase)
        .copied()
        .ok_or(MetricsError::MissingPhase(phase))
}

fn trial_energies(
    trial: &EnergyTrialInput<'_>,
    t_hold_nominal: Option<f64>,
    phase_cfg: &PhaseInferenceConfig,
) -> Result<PhaseEnergies, MetricsError> {
    if !(trial.mass_g > 0.0) {
        return Err(MetricsError::ZeroMass);
    }
    let marks = signal::segment_phases(trial.trace, trial.marks, phase_cfg)?;
    let grasp = find(&marks, Phase::Grasp)?;
    let hold = find(&marks, Phase::Hold)?;
    let release = find(&marks, Phase::Release)?;
    let hold_end = match t_hold_nominal {
        Some(h) => hold.t_end.min(hold.t_start + h),
        None => hold.t_end,
    };
    let e_grasp = signal::integrate_power(trial.trace, grasp.t_start, grasp.t_end)?;
    let e_hold = signal::integrate_power(trial.trace, hold.t_start, hold_end)?;
    let e_release = signal::integrate_power(trial.trace, release.t_start, release.t_end)?;
    let hold_duration = hold_end - hold.t_start;
    let p_hold_mean = e_hold / hold_duration;
    Ok(PhaseEnergies {
        e_grasp,
        e_hold,
        e_release,
        e_cycle: e_grasp + e_hold + e_release,
        hold_duration,
        p_hold_mean,
        e_hold10: 10.0 * p_hold_mean,
    })
}

/// Phase-wise cycle energy per trial and its summaries.
///
/// When `t_hold_nominal` is set, the hold integral covers at most that many
/// seconds from the start of the hold phase.
pub fn energy_metrics(
    trials: &[EnergyTrialInput<'_>],
    t_hold_nominal: Option<f64>,
    phase_cfg: &PhaseInferenceConfig,
    cfg: &BootstrapConfig,
) -> Result<EnergyResult, MetricsError> {
    if trials.is_empty() {
        return Err(MetricsError::NoData("energy trial"));
    }
    let per_trial = trials
        .iter()
        .map(|t| trial_energies(t, t_hold_nominal, phase_cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let col = |f: fn(&PhaseEnergies) -> f64| per_trial.iter().map(f).collect::<Vec<f64>>();
    let summary = |xs: Vec<f64>, stream| stats::summarize(&xs, &cfg.with_stream(stream));

    let p_hold_mean = stats::median(&col(|p| p.p_hold_mean))?;
    let cycle_ratio: Vec<f64> = per_trial
        .iter()
        .zip(trials)
        .map(|(p, t)| p.e_cycle / t.mass_g)
        .collect();
    let grasp_ratio: Vec<f64> = per_trial
        .iter()
        .zip(trials)
        .map(|(p, t)| p.e_grasp / t.mass_g)
        .collect();

    Ok(EnergyResult {
        e_grasp: summary(col(|p| p.e_grasp), 1)?,
        e_hold: summary(col(|p| p.e_hold), 2)?,
        e_release: summary(col(|p| p.e_release), 3)?,
        e_cycle: summary(col(|p| p.e_cycle), 4)?,
        e_hold10_summary: summary(col(|p| p.e_hold10), 5)?,
        p_hold_mean,
        e_hold10: 10.0 * p_hold_mean,
        energy_to_weight_cycle: stats::median(&cycle_ratio)?,
        energy_to_weight_grasp: stats::median(&grasp_ratio)?,
        t_hold_nominal,
        per_trial,
    })
}
