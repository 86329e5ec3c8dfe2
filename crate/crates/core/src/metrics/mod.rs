//! Metric families computed from validated sessions.

mod energy;
mod iipb;
mod nist;
mod transfer;
mod ycb;

pub use energy::{energy_metrics, EnergyResult, EnergyTrialInput, PhaseEnergies};
pub use iipb::{iipb_metrics, IipbResult, PayloadStat, PullTrial};
pub use nist::{
    cycle_time, grasp_strength, slip_metrics, sum_finger_traces, ArtifactCycleTime, ArtifactKey,
    ArtifactSlip, ArtifactStrength, GraspStrength, NistResult, SlipMeasurement,
};
pub use transfer::{transfer_summary, GroupTransfer, TransferResult, TransferStats};
pub use ycb::{
    classify_attempt, ycb_aggregate, AttemptVerdict, MacroAverage, ObjectSuccess, PoseSuccess,
    Reason, YcbResult, HOLD_MIN_S, LIFT_DEADLINE_S, TIMEOUT_S,
};

use crate::model::Phase;
use crate::signal::SignalError;
use crate::stats::StatsError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("attempt ({object_id}, {pose_index}, {attempt_index}): outcome override contradicts logged events")]
    InconsistentOverride {
        object_id: String,
        pose_index: u32,
        attempt_index: u32,
    },
    #[error("object {object_id}: pose {pose_index} has {found} attempts, other poses have {expected}")]
    UnbalancedAttempts {
        object_id: String,
        pose_index: u32,
        expected: usize,
        found: usize,
    },
    #[error("stop time {stop} s is not after start time {start} s")]
    NegativeDuration { start: f64, stop: f64 },
    #[error("finger traces share no common time span")]
    TraceSpanMismatch,
    #[error("summed normal force must be positive")]
    ZeroNormalForce,
    #[error("artifact {0} has no finger length for the holding-quality factor")]
    MissingFingerLength(String),
    #[error("applied torque must be positive, got {0}")]
    InvalidTorque(f64),
    #[error("object mass must be positive for energy-to-weight ratios")]
    ZeroMass,
    #[error("session has no gripper profile")]
    MissingProfile,
    #[error("no {0} data")]
    NoData(&'static str),
    #[error("no {0:?} phase found")]
    MissingPhase(Phase),
}
