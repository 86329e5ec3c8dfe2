use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::model::{ArtifactShape, ArtifactSpec, GripperProfile, SampledTrace, SummaryStat};
use crate::signal::{self, SlipDetectorConfig};
use crate::stats::{self, BootstrapConfig};

#[derive(Debug, Clone, Copy)]
pub struct PullTrial<'a> {
    pub trace: &'a SampledTrace,
    pub artifact: &'a ArtifactSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayloadStat {
    pub shape: ArtifactShape,
    pub dimension_mm: f64,
    pub f_ideal: SummaryStat,
    pub safety_limit_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IipbResult {
    pub profile_code: String,
    pub range_mm: [f64; 2],
    pub per_artifact: Vec<PayloadStat>,
}

/// Ideal payload per artifact size: the largest pull force sustained before
/// slip, or before the safety limit when no slip occurred.
pub fn iipb_metrics(
    pull_trials: &[PullTrial<'_>],
    profile: Option<&GripperProfile>,
    slip_cfg: &SlipDetectorConfig,
    cfg: &BootstrapConfig,
) -> Result<IipbResult, MetricsError> {
    let profile = profile.ok_or(MetricsError::MissingProfile)?;
    if pull_trials.is_empty() {
        return Err(MetricsError::NoData("payload trial"));
    }
    let mut groups: Vec<(ArtifactShape, f64, Vec<f64>, usize)> = Vec::new();
    for trial in pull_trials {
        let onset = signal::detect_slip_onset(trial.trace, slip_cfg)?;
        let key = (trial.artifact.shape, trial.artifact.characteristic_dimension_mm);
        let idx = match groups.iter().position(|g| (g.0, g.1) == key) {
            Some(i) => i,
            None => {
                groups.push((key.0, key.1, Vec::new(), 0));
                groups.len() - 1
            }
        };
        groups[idx].2.push(onset.f_slip);
        groups[idx].3 += usize::from(!onset.slipped);
    }
    groups.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let per_artifact = groups
        .into_iter()
        .enumerate()
        .map(|(i, (shape, dimension_mm, forces, safety))| {
            Ok(PayloadStat {
                shape,
                dimension_mm,
                f_ideal: stats::summarize(&forces, &cfg.with_stream(i as u64 + 1))?,
                safety_limit_trials: safety,
            })
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;
    Ok(IipbResult {
        profile_code: profile.code(),
        range_mm: profile.range_mm,
        per_artifact,
    })
}
