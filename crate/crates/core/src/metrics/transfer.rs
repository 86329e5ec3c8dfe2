use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::model::{ParticipantGroup, Proportion, SummaryStat, TransferCycle};
use crate::stats::{self, BootstrapConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferStats {
    pub n_cycles: usize,
    /// Arithmetic mean duration of fault-free cycles.
    pub mean_s: Option<f64>,
    /// Median/IQR/bootstrap summary of fault-free cycle durations.
    pub summary: Option<SummaryStat>,
    /// Fault-free fraction over all cycles.
    pub success: Proportion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTransfer {
    pub group: ParticipantGroup,
    pub stats: TransferStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub overall: TransferStats,
    pub per_group: Vec<GroupTransfer>,
}

fn stats_for(cycles: &[&TransferCycle], cfg: &BootstrapConfig) -> Result<TransferStats, MetricsError> {
    let durations: Vec<f64> = cycles
        .iter()
        .filter(|c| c.is_success())
        .map(|c| c.duration_s)
        .collect();
    let successes = durations.len() as u64;
    let (mean_s, summary) = if durations.is_empty() {
        (None, None)
    } else {
        (
            Some(stats::mean(&durations)?),
            Some(stats::summarize(&durations, cfg)?),
        )
    };
    Ok(TransferStats {
        n_cycles: cycles.len(),
        mean_s,
        summary,
        success: stats::proportion(successes, cycles.len() as u64, cfg.confidence)?,
    })
}

/// Mean and median transfer durations with the fault-free success rate,
/// overall and per participant group. Faulted cycles count against
/// robustness but are left out of the duration statistics.
pub fn transfer_summary(cycles: &[TransferCycle], cfg: &BootstrapConfig) -> Result<TransferResult, MetricsError> {
    if cycles.is_empty() {
        return Err(MetricsError::NoData("transfer cycle"));
    }
    let all: Vec<&TransferCycle> = cycles.iter().collect();
    let mut groups: BTreeMap<&ParticipantGroup, Vec<&TransferCycle>> = BTreeMap::new();
    for c in cycles {
        groups.entry(&c.group).or_default().push(c);
    }
    let per_group = groups
        .into_iter()
        .enumerate()
        .map(|(i, (group, members))| {
            Ok(GroupTransfer {
                group: group.clone(),
                stats: stats_for(&members, &cfg.with_stream(i as u64 + 1))?,
            })
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;
    Ok(TransferResult {
        overall: stats_for(&all, cfg)?,
        per_group,
    })
}
