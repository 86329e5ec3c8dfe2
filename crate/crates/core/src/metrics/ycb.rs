use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::model::{GraspAttempt, Outcome, Proportion, SummaryStat};
use crate::stats::{self, BootstrapConfig};

/// Lift of at least 5 cm must happen within this many seconds of the grasp command.
pub const LIFT_DEADLINE_S: f64 = 3.0;
/// Minimum slip-free hold.
pub const HOLD_MIN_S: f64 = 3.0;
/// Every event must be logged within this many seconds of the grasp command.
pub const TIMEOUT_S: f64 = 10.0;

// absorbs decimal round-off in logged timestamps
const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Satisfied,
    NoLift,
    LiftTooSlow,
    HoldTooShort,
    SlipDuringHold,
    Timeout,
    /// No events logged; the outcome came from the override column.
    Reported,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptVerdict {
    pub outcome: Outcome,
    pub reason: Reason,
}

fn judge_events(attempt: &GraspAttempt) -> Reason {
    let e = &attempt.events;
    let t0 = e.t_grasp_cmd;
    let Some(lift) = e.t_lift_5cm else {
        return Reason::NoLift;
    };
    if lift - t0 > LIFT_DEADLINE_S + SLACK {
        return Reason::LiftTooSlow;
    }
    if e.hold_duration.map_or(true, |h| h < HOLD_MIN_S - SLACK) {
        return Reason::HoldTooShort;
    }
    if e.slip_during_hold {
        return Reason::SlipDuringHold;
    }
    let deadline = t0 + TIMEOUT_S + SLACK;
    if [e.t_lift_5cm, e.t_release_done]
        .into_iter()
        .flatten()
        .any(|t| t > deadline)
    {
        return Reason::Timeout;
    }
    Reason::Satisfied
}

/// Applies the YCB success rule: lifted 5 cm within 3 s, held 3 s without
/// slip, all events within a 10 s timeout. The reason names the first
/// clause that failed.
pub fn classify_attempt(attempt: &GraspAttempt) -> Result<AttemptVerdict, MetricsError> {
    if !attempt.events.has_events() {
        return Ok(match attempt.outcome_override {
            Some(outcome) => AttemptVerdict {
                outcome,
                reason: Reason::Reported,
            },
            None => AttemptVerdict {
                outcome: Outcome::Failure,
                reason: Reason::NoLift,
            },
        });
    }
    let reason = judge_events(attempt);
    let outcome = if reason == Reason::Satisfied {
        Outcome::Success
    } else {
        Outcome::Failure
    };
    if attempt.outcome_override.is_some_and(|o| o != outcome) {
        return Err(MetricsError::InconsistentOverride {
            object_id: attempt.object_id.clone(),
            pose_index: attempt.pose_index,
            attempt_index: attempt.attempt_index,
        });
    }
    Ok(AttemptVerdict { outcome, reason })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseSuccess {
    pub object_id: String,
    pub pose_index: u32,
    pub proportion: Proportion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSuccess {
    pub object_id: String,
    pub poses: usize,
    pub attempts_per_pose: usize,
    /// Mean of the per-pose success proportions.
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroAverage {
    pub point: f64,
    /// Percentile bootstrap over objects.
    pub ci95: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YcbResult {
    pub per_pose: Vec<PoseSuccess>,
    pub per_object: Vec<ObjectSuccess>,
    pub micro: Proportion,
    #[serde(rename = "macro")]
    pub macro_avg: MacroAverage,
    pub time_to_lift: Option<SummaryStat>,
    pub time_to_release: Option<SummaryStat>,
}

/// Per-pose, per-object, micro and macro success rates.
///
/// Every pose of one object must carry the same number of attempts. Timing
/// summaries cover successful attempts only; time-to-release runs from the
/// end of the hold to the release-done event.
pub fn ycb_aggregate(attempts: &[GraspAttempt], cfg: &BootstrapConfig) -> Result<YcbResult, MetricsError> {
    if attempts.is_empty() {
        return Err(MetricsError::NoData("YCB attempt"));
    }
    let mut groups: BTreeMap<&str, BTreeMap<u32, (u64, u64)>> = BTreeMap::new();
    let mut lift_times = Vec::new();
    let mut release_times = Vec::new();
    for a in attempts {
        let verdict = classify_attempt(a)?;
        let cell = groups
            .entry(&a.object_id)
            .or_default()
            .entry(a.pose_index)
            .or_insert((0, 0));
        cell.1 += 1;
        if verdict.outcome.is_success() {
            cell.0 += 1;
            let e = &a.events;
            if let Some(lift) = e.t_lift_5cm {
                lift_times.push(lift - e.t_grasp_cmd);
            }
            if let (Some(cmd), Some(done)) = (e.t_release_cmd(), e.t_release_done) {
                if done >= cmd {
                    release_times.push(done - cmd);
                }
            }
        }
    }

    let mut per_pose = Vec::new();
    let mut per_object = Vec::new();
    let (mut total_g, mut total_n) = (0, 0);
    for (object, poses) in &groups {
        let expected = poses.values().next().map_or(0, |c| c.1) as usize;
        let (mut obj_g, mut obj_n) = (0u64, 0u64);
        for (&pose, &(g, n)) in poses {
            if n as usize != expected {
                return Err(MetricsError::UnbalancedAttempts {
                    object_id: object.to_string(),
                    pose_index: pose,
                    expected,
                    found: n as usize,
                });
            }
            let proportion = stats::proportion(g, n, cfg.confidence)?;
            obj_g += g;
            obj_n += n;
            per_pose.push(PoseSuccess {
                object_id: object.to_string(),
                pose_index: pose,
                proportion,
            });
            total_g += g;
            total_n += n;
        }
        per_object.push(ObjectSuccess {
            object_id: object.to_string(),
            poses: poses.len(),
            attempts_per_pose: expected,
            success_rate: obj_g as f64 / obj_n as f64,
        });
    }

    let object_rates: Vec<f64> = per_object.iter().map(|o| o.success_rate).collect();
    let macro_avg = MacroAverage {
        point: object_rates.iter().sum::<f64>() / object_rates.len() as f64,
        ci95: stats::bootstrap_ci(&object_rates, &cfg.with_stream(1), |xs| {
            stats::mean(xs).expect("resample is non-empty and finite")
        })?,
    };
    let summary = |xs: &[f64], stream| {
        (!xs.is_empty())
            .then(|| stats::summarize(xs, &cfg.with_stream(stream)))
            .transpose()
    };

    Ok(YcbResult {
        per_pose,
        per_object,
        micro: stats::proportion(total_g, total_n, cfg.confidence)?,
        macro_avg,
        time_to_lift: summary(&lift_times, 2)?,
        time_to_release: summary(&release_times, 3)?,
    })
}
