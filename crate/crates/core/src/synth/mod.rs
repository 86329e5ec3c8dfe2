//! Synthetic sessions with known ground truth.
//!
//! Every generator is a pure function of its parameters and seed. Bundles
//! are written through [`crate::ingest::write_session`] together with a
//! `ground_truth.json` sidecar, so tests that compare analysis against the
//! truth exercise the whole load path.

mod replica;
mod sessions;
mod traces;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use replica::{gen_replica, REPLICA_TARGETS};
pub use sessions::{gen_oracle_bundle, gen_transfer, gen_ycb, symmetric_offsets, TransferGroupSpec};
pub use traces::{
    gen_energy, gen_finger_force, gen_slip, EnergyParams, PhaseEnergyTruth, SlipParams, ENERGY_IDLE_S,
    FORCE_PLATEAU_S, FORCE_RISE_S, FORCE_SETTLE_S, SLIP_DWELL_S, SLIP_LEAD_S, SLIP_TAIL_S, STEP_GAP_S,
    SUPPLY_V,
};

use crate::ingest::{self, IngestError};
use crate::model::{ModelError, ParticipantGroup, Session};
use crate::stats;

pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{GROUND_TRUTH_FILE}: {0}")]
    Json(#[from] serde_json::Error),
    #[error("ground truth is inconsistent: {0}")]
    InvalidTruth(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub generator: String,
    #[serde(default)]
    pub ycb: Option<YcbTruth>,
    #[serde(default)]
    pub cycle_time: Vec<ArtifactTruth>,
    #[serde(default)]
    pub grasp_strength: Vec<ArtifactTruth>,
    #[serde(default)]
    pub slip: Vec<ArtifactTruth>,
    #[serde(default)]
    pub payload: Vec<ArtifactTruth>,
    #[serde(default)]
    pub energy: Option<EnergyTruth>,
    #[serde(default)]
    pub transfer: Option<TransferTruth>,
    #[serde(default)]
    pub profile_code: Option<String>,
}

impl GroundTruth {
    pub fn new(generator: &str, seed: u64) -> Self {
        Self {
            seed,
            generator: generator.to_string(),
            ycb: None,
            cycle_time: Vec::new(),
            grasp_strength: Vec::new(),
            slip: Vec::new(),
            payload: Vec::new(),
            energy: None,
            transfer: None,
            profile_code: None,
        }
    }

    /// Internal consistency checks; an empty list means the file is usable.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let finite = |x: f64| x.is_finite();
        if let Some(y) = &self.ycb {
            if y.successes > y.attempts {
                out.push("ycb: successes exceed attempts".into());
            }
            let unit = |x: f64| (0.0..=1.0).contains(&x);
            if !unit(y.micro) || !unit(y.macro_avg) || !unit(y.expected_macro) {
                out.push("ycb: rates outside [0, 1]".into());
            }
            if y.attempts > 0 && y.micro != y.successes as f64 / y.attempts as f64 {
                out.push("ycb: micro differs from successes / attempts".into());
            }
            if y.per_object.iter().any(|o| !unit(o.rate) || !unit(o.p)) {
                out.push("ycb: per-object rate outside [0, 1]".into());
            }
        }
        for (family, rows) in [
            ("cycle_time", &self.cycle_time),
            ("grasp_strength", &self.grasp_strength),
            ("slip", &self.slip),
            ("payload", &self.payload),
        ] {
            for row in rows {
                if row.values.is_empty() || !row.values.iter().all(|v| finite(*v)) {
                    out.push(format!("{family} {}: values empty or non-finite", row.artifact_id));
                } else if stats::median(&row.values).ok() != Some(row.median) {
                    out.push(format!("{family} {}: median does not match values", row.artifact_id));
                }
            }
        }
        if let Some(e) = &self.energy {
            for (i, p) in e.per_trial.iter().enumerate() {
                let sum = p.e_grasp + p.e_hold + p.e_release;
                if !finite(sum) || (p.e_cycle - sum).abs() > 1e-9 * sum.abs().max(1.0) {
                    out.push(format!("energy trial {}: e_cycle is not the phase sum", i + 1));
                }
                if !(p.hold_duration > 0.0) {
                    out.push(format!("energy trial {}: hold duration not positive", i + 1));
                }
            }
            if e.per_trial.len() != e.masses_g.len() {
                out.push("energy: one mass per trial required".into());
            }
            if e.masses_g.iter().any(|m| !(*m > 0.0)) {
                out.push("energy: masses must be positive".into());
            }
        }
        if let Some(t) = &self.transfer {
            if !(0.0..=1.0).contains(&t.s_transfer) || !(0.0..=1.0).contains(&t.fault_rate) {
                out.push("transfer: rates outside [0, 1]".into());
            }
            for g in &t.groups {
                if g.n_faulted > g.n_cycles || !(g.mean_s > 0.0) || !(g.sd_s >= 0.0) {
                    out.push(format!("transfer group {}: inconsistent counts or parameters", g.group));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YcbTruth {
    pub poses: u32,
    pub attempts_per_pose: u32,
    pub successes: u64,
    pub attempts: u64,
    pub micro: f64,
    #[serde(rename = "macro")]
    pub macro_avg: f64,
    /// Macro average of the generating probabilities.
    pub expected_macro: f64,
    pub per_object: Vec<ObjectTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectTruth {
    pub object_id: String,
    /// Mean generating probability over poses.
    pub p: f64,
    /// Realized success rate.
    pub rate: f64,
}

/// True per-trial values for one artifact and their median.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactTruth {
    pub artifact_id: String,
    pub values: Vec<f64>,
    pub median: f64,
    /// Trials that end at a safety stop instead of slipping.
    #[serde(default)]
    pub safety_limit_trials: usize,
}

impl ArtifactTruth {
    pub fn new(artifact_id: &str, values: Vec<f64>) -> Self {
        let median = stats::median(&values).unwrap_or(f64::NAN);
        Self {
            artifact_id: artifact_id.to_string(),
            values,
            median,
            safety_limit_trials: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTruth {
    pub per_trial: Vec<PhaseEnergyTruth>,
    pub masses_g: Vec<f64>,
    pub e_grasp: f64,
    pub e_hold: f64,
    pub e_release: f64,
    pub e_cycle: f64,
    pub p_hold: f64,
    pub e_hold10: f64,
    pub energy_to_weight_grasp: f64,
    pub energy_to_weight_cycle: f64,
}

impl EnergyTruth {
    pub fn new(per_trial: Vec<PhaseEnergyTruth>, masses_g: Vec<f64>) -> Self {
        let med = |f: fn(&PhaseEnergyTruth) -> f64| {
            stats::median(&per_trial.iter().map(f).collect::<Vec<_>>()).unwrap_or(f64::NAN)
        };
        let ratio = |f: fn(&PhaseEnergyTruth) -> f64| {
            let r: Vec<f64> = per_trial.iter().zip(&masses_g).map(|(p, m)| f(p) / m).collect();
            stats::median(&r).unwrap_or(f64::NAN)
        };
        let p_hold = med(|p| p.p_hold);
        Self {
            e_grasp: med(|p| p.e_grasp),
            e_hold: med(|p| p.e_hold),
            e_release: med(|p| p.e_release),
            e_cycle: med(|p| p.e_cycle),
            p_hold,
            e_hold10: 10.0 * p_hold,
            energy_to_weight_grasp: ratio(|p| p.e_grasp),
            energy_to_weight_cycle: ratio(|p| p.e_cycle),
            per_trial,
            masses_g,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferTruth {
    pub fault_rate: f64,
    /// Realized fault-free fraction.
    pub s_transfer: f64,
    pub groups: Vec<GroupTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTruth {
    pub group: ParticipantGroup,
    pub mean_s: f64,
    pub sd_s: f64,
    pub n_cycles: usize,
    pub n_faulted: usize,
    /// Mean of the generated fault-free durations.
    pub generated_mean_s: Option<f64>,
}

/// Writes `session` and its ground truth as a bundle under `dir`.
pub fn write_bundle(session: &Session, truth: &GroundTruth, dir: impl AsRef<Path>) -> Result<(), SynthError> {
    let problems = truth.validate();
    if !problems.is_empty() {
        return Err(SynthError::InvalidTruth(problems.join("; ")));
    }
    let dir = dir.as_ref();
    ingest::write_session(session, dir)?;
    let mut json = serde_json::to_string_pretty(truth)?;
    json.push('\n');
    let path = dir.join(GROUND_TRUTH_FILE);
    fs::write(&path, json).map_err(|source| IngestError::Io { path, source })?;
    Ok(())
}

/// Reads and checks the ground-truth sidecar of a bundle.
pub fn read_ground_truth(dir: impl AsRef<Path>) -> Result<GroundTruth, SynthError> {
    let path = dir.as_ref().join(GROUND_TRUTH_FILE);
    let text = fs::read_to_string(&path).map_err(|source| IngestError::Io { path, source })?;
    let truth: GroundTruth = serde_json::from_str(&text)?;
    let problems = truth.validate();
    if problems.is_empty() {
        Ok(truth)
    } else {
        Err(SynthError::InvalidTruth(problems.join("; ")))
    }
}
