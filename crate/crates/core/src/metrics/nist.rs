use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::model::{ArtifactSpec, SampledTrace, SummaryStat, TraceKind};
use crate::signal::{self, PeakPlateau, SignalError, SlipDetectorConfig, SlipOnset};
use crate::stats::{self, BootstrapConfig};

/// Identifies the artifact a row of NIST results belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactKey {
    pub artifact_id: String,
    pub dimension_mm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grasp_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactCycleTime {
    pub artifact: ArtifactKey,
    pub cycle_time: SummaryStat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspStrength {
    pub per_trial: Vec<PeakPlateau>,
    /// Peak of the summed finger force.
    pub peak: SummaryStat,
    /// Plateau of the summed finger force.
    pub f_total: SummaryStat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactStrength {
    pub artifact: ArtifactKey,
    pub strength: GraspStrength,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactSlip {
    pub artifact: ArtifactKey,
    pub f_slip: SummaryStat,
    /// Absent when no trial logged its normal force.
    pub mu_eff: Option<SummaryStat>,
    /// Absent when no torque fixture was used ("not measured").
    pub q_hold: Option<SummaryStat>,
    /// Trials that reached the safety limit without a detected drop.
    pub safety_limit_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NistResult {
    pub cycle_time: Vec<ArtifactCycleTime>,
    pub grasp_strength: Vec<ArtifactStrength>,
    pub slip: Vec<ArtifactSlip>,
}

/// Summarizes `T_stop - T_start` over trials.
pub fn cycle_time(trials: &[(f64, f64)], cfg: &BootstrapConfig) -> Result<SummaryStat, MetricsError> {
    let durations = trials
        .iter()
        .map(|&(start, stop)| {
            if stop > start {
                Ok(stop - start)
            } else {
                Err(MetricsError::NegativeDuration { start, stop })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(stats::summarize(&durations, cfg)?)
}

/// Pointwise sum of finger force traces over their common span, on the
/// time base of the first finger. Other fingers are interpolated linearly.
pub fn sum_finger_traces(fingers: &[&SampledTrace]) -> Result<SampledTrace, MetricsError> {
    let (first, rest) = fingers.split_first().ok_or(MetricsError::NoData("finger trace"))?;
    for f in fingers {
        if f.kind() != TraceKind::Force {
            return Err(SignalError::WrongKind {
                expected: "force",
                found: f.kind(),
            }
            .into());
        }
        if f.len() < 2 {
            return Err(SignalError::TooFewSamples { needed: 2, found: f.len() }.into());
        }
        if !f.is_strictly_increasing() {
            return Err(SignalError::NonMonotonicTrace.into());
        }
    }
    if rest.is_empty() {
        return Ok((*first).clone().with_phase_marks(None));
    }
    let lo = fingers.iter().filter_map(|f| f.start()).fold(f64::NEG_INFINITY, f64::max);
    let hi = fingers.iter().filter_map(|f| f.end()).fold(f64::INFINITY, f64::min);
    let (mut times, mut totals) = (Vec::new(), Vec::new());
    let base = first.values();
    for (&t, &v) in first.times().iter().zip(base.iter()) {
        if t < lo || t > hi {
            continue;
        }
        let others: f64 = rest.iter().map(|f| lerp_at(f, t)).sum();
        times.push(t);
        totals.push(v + others);
    }
    if times.len() < 2 {
        return Err(MetricsError::TraceSpanMismatch);
    }
    Ok(SampledTrace::scalar(TraceKind::Force, times, totals).map_err(SignalError::from)?)
}

fn lerp_at(trace: &SampledTrace, t: f64) -> f64 {
    let times = trace.times();
    let values = trace.values();
    let j = times.partition_point(|&s| s < t);
    if j == 0 {
        return values[0];
    }
    if j >= times.len() {
        return values[times.len() - 1];
    }
    if times[j] == t {
        return values[j];
    }
    let w = (t - times[j - 1]) / (times[j] - times[j - 1]);
    values[j - 1] + (values[j] - values[j - 1]) * w
}

/// Total grasp force per trial: finger forces summed pointwise, then peak
/// and plateau of the smoothed total.
pub fn grasp_strength(
    trials: &[Vec<&SampledTrace>],
    plateau_window: f64,
    smoothing_window: f64,
    cfg: &BootstrapConfig,
) -> Result<GraspStrength, MetricsError> {
    if trials.is_empty() {
        return Err(MetricsError::NoData("grasp strength trial"));
    }
    let per_trial = trials
        .iter()
        .map(|fingers| {
            let total = sum_finger_traces(fingers)?;
            Ok(signal::peak_plateau(&total, plateau_window, smoothing_window)?)
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;
    let peaks: Vec<f64> = per_trial.iter().map(|p| p.peak).collect();
    let plateaus: Vec<f64> = per_trial.iter().map(|p| p.plateau).collect();
    Ok(GraspStrength {
        peak: stats::summarize(&peaks, &cfg.with_stream(1))?,
        f_total: stats::summarize(&plateaus, &cfg.with_stream(2))?,
        per_trial,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlipMeasurement {
    pub onset: SlipOnset,
    /// `F_slip / ΣN`.
    pub mu_eff: f64,
    /// `F_slip · L / T_a`, when a torque was applied.
    pub q_hold: Option<f64>,
}

/// Slip force, effective friction coefficient and, for torque-loaded
/// fixtures, the holding-quality factor.
pub fn slip_metrics(
    tangential: &SampledTrace,
    normals_sum: f64,
    artifact: &ArtifactSpec,
    applied_torque: Option<f64>,
    cfg: &SlipDetectorConfig,
) -> Result<SlipMeasurement, MetricsError> {
    if !(normals_sum > 0.0) {
        return Err(MetricsError::ZeroNormalForce);
    }
    let finger_length = match applied_torque {
        Some(ta) if !(ta > 0.0) => return Err(MetricsError::InvalidTorque(ta)),
        Some(_) => Some(
            artifact
                .finger_length_m
                .ok_or_else(|| MetricsError::MissingFingerLength(artifact.artifact_id.clone()))?,
        ),
        None => None,
    };
    let onset = signal::detect_slip_onset(tangential, cfg)?;
    Ok(SlipMeasurement {
        onset,
        mu_eff: onset.f_slip / normals_sum,
        q_hold: applied_torque
            .zip(finger_length)
            .map(|(ta, l)| onset.f_slip * l / ta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ArtifactShape;

    fn constant(value: f64) -> SampledTrace {
        let t: Vec<f64> = (0..=200).map(|k| k as f64 * 0.01).collect();
        let n = t.len();
        SampledTrace::scalar(TraceKind::Force, t, vec![value; n]).unwrap()
    }

    fn tangential(peak: f64) -> SampledTrace {
        let t: Vec<f64> = (0..=400).map(|k| k as f64 * 0.01).collect();
        let v = t
            .iter()
            .map(|&x| if x < 2.0 { peak * x / 2.0 } else if x <= 2.2 { peak } else { 0.3 * peak })
            .collect();
        SampledTrace::scalar(TraceKind::Tangential, t, v).unwrap()
    }

    #[test]
    fn cycle_time_examples() {
        let cfg = BootstrapConfig::default();
        let s = cycle_time(&[(10.0, 13.23)], &cfg).unwrap();
        assert!((s.median - 3.23).abs() < 1e-12);
        let trials: Vec<(f64, f64)> = (0..32)
            .map(|k| {
                let d = 0.002 * (k / 2) as f64 * if k % 2 == 0 { 1.0 } else { -1.0 };
                (0.0, 3.91 + d)
            })
            .collect();
        assert!((cycle_time(&trials, &cfg).unwrap().median - 3.91).abs() < 1e-9);
        assert!(matches!(
            cycle_time(&[(5.0, 5.0)], &cfg),
            Err(MetricsError::NegativeDuration { .. })
        ));
    }

    #[test]
    fn strength_sums_fingers() {
        let cfg = BootstrapConfig::default();
        let (a, b) = (constant(4.895), constant(4.895));
        let s = grasp_strength(&[vec![&a, &b]], 0.5, 0.05, &cfg).unwrap();
        assert!((s.f_total.median - 9.79).abs() < 1e-12);
        let one = constant(8.18);
        let s = grasp_strength(&[vec![&one]], 0.5, 0.05, &cfg).unwrap();
        assert_eq!(s.f_total.median, 8.18);
        let zero = constant(0.0);
        let s = grasp_strength(&[vec![&zero, &zero]], 0.5, 0.05, &cfg).unwrap();
        assert_eq!(s.f_total.median, 0.0);
    }

    #[test]
    fn disjoint_fingers_are_rejected() {
        let a = constant(1.0);
        let b = SampledTrace::scalar(TraceKind::Force, vec![5.0, 6.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(sum_finger_traces(&[&a, &b]), Err(MetricsError::TraceSpanMismatch));
    }

    #[test]
    fn slip_friction_and_holding_quality() {
        let cfg = SlipDetectorConfig::default();
        let mut art = ArtifactSpec::new("c50", ArtifactShape::Cylinder, 50.0, 200.0);
        let m = slip_metrics(&tangential(5.78), 9.79, &art, None, &cfg).unwrap();
        assert!((m.mu_eff - 0.590).abs() < 5e-4);
        assert!(m.q_hold.is_none());
        assert_eq!(
            slip_metrics(&tangential(1.0), 0.0, &art, None, &cfg),
            Err(MetricsError::ZeroNormalForce)
        );
        assert!(matches!(
            slip_metrics(&tangential(1.0), 1.0, &art, Some(1.0), &cfg),
            Err(MetricsError::MissingFingerLength(_))
        ));
        art.finger_length_m = Some(1.0);
        let m = slip_metrics(&tangential(1.0), 1.0, &art, Some(1.0), &cfg).unwrap();
        assert!((m.q_hold.unwrap() - 1.0).abs() < 1e-12);
    }
}
