//! Domain types shared by ingestion, metrics and reporting.
//!
//! Units are fixed SI throughout: seconds, newtons, watts, joules, volts and
//! amperes. Artifact dimensions are millimeters and masses are grams, which
//! matches how gripper benchmark tables are usually published. Conversion
//! happens once, in [`crate::ingest`].

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Bundle schema version understood by this crate.
pub const SCHEMA_VERSION: &str = "cegb-1";

/// Schema versions accepted on load.
pub const SUPPORTED_SCHEMA_VERSIONS: &[&str] = &[SCHEMA_VERSION];

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("channel length {found} does not match {expected} timestamps")]
    LengthMismatch { expected: usize, found: usize },
    #[error("trace kind {0} cannot hold a single scalar channel")]
    NotScalar(TraceKind),
    #[error("unknown code `{0}`")]
    UnknownCode(String),
}

/// A full benchmark run for one gripper on one platform.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub manifest: Manifest,
    pub attempts: Vec<GraspAttempt>,
    pub transfer_cycles: Vec<TransferCycle>,
    pub traces: BTreeMap<String, SampledTrace>,
    pub artifacts: BTreeMap<String, ArtifactSpec>,
    /// Trial index for the trace-based families (NIST, energy, payload).
    pub trials: Vec<Trial>,
}

impl Session {
    pub fn new(manifest: Manifest) -> Self {
        Self {
            manifest,
            attempts: Vec::new(),
            transfer_cycles: Vec::new(),
            traces: BTreeMap::new(),
            artifacts: BTreeMap::new(),
            trials: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: String,
    pub gripper_name: String,
    pub platform_name: String,
    pub gripper_profile: Option<GripperProfile>,
    pub operator_notes: Option<String>,
}

impl Manifest {
    pub fn new(gripper_name: impl Into<String>, platform_name: impl Into<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            gripper_name: gripper_name.into(),
            platform_name: platform_name.into(),
            gripper_profile: None,
            operator_notes: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactShape {
    Cylinder,
    Box,
    Sphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactSpec {
    pub artifact_id: String,
    pub shape: ArtifactShape,
    /// Diameter for cylinders and spheres, gripping surface distance for boxes.
    pub characteristic_dimension_mm: f64,
    pub mass_g: f64,
    pub coating: Option<String>,
    /// Finger length used for the holding-quality factor.
    pub finger_length_m: Option<f64>,
}

impl ArtifactSpec {
    pub fn new(id: impl Into<String>, shape: ArtifactShape, dimension_mm: f64, mass_g: f64) -> Self {
        Self {
            artifact_id: id.into(),
            shape,
            characteristic_dimension_mm: dimension_mm,
            mass_g,
            coating: None,
            finger_length_m: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure,
}

impl Outcome {
    pub fn is_success(self) -> bool {
        self == Outcome::Success
    }
}

/// One YCB grasp attempt: object `object_id` in pose `pose_index`, repetition
/// `attempt_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspAttempt {
    pub object_id: String,
    pub pose_index: u32,
    pub attempt_index: u32,
    pub events: AttemptEvents,
    pub outcome_override: Option<Outcome>,
    /// Optional sensor trace recorded during the attempt.
    pub trace_id: Option<String>,
}

/// Event timestamps in session seconds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AttemptEvents {
    pub t_grasp_cmd: f64,
    pub t_lift_5cm: Option<f64>,
    pub hold_duration: Option<f64>,
    pub slip_during_hold: bool,
    pub t_release_done: Option<f64>,
}

impl AttemptEvents {
    /// True when anything beyond the grasp command was logged.
    pub fn has_events(&self) -> bool {
        self.t_lift_5cm.is_some()
            || self.hold_duration.is_some()
            || self.t_release_done.is_some()
            || self.slip_during_hold
    }

    /// Release command time, taken as the end of the hold.
    pub fn t_release_cmd(&self) -> Option<f64> {
        Some(self.t_lift_5cm? + self.hold_duration?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParticipantGroup {
    Bachelor,
    Master,
    UntrainedColleague,
    Experienced,
    Other(String),
}

impl ParticipantGroup {
    pub fn as_str(&self) -> &str {
        match self {
            ParticipantGroup::Bachelor => "Bachelor",
            ParticipantGroup::Master => "Master",
            ParticipantGroup::UntrainedColleague => "UntrainedColleague",
            ParticipantGroup::Experienced => "Experienced",
            ParticipantGroup::Other(s) => s,
        }
    }

    pub fn parse(s: &str) -> Self {
        match s {
            "Bachelor" => ParticipantGroup::Bachelor,
            "Master" => ParticipantGroup::Master,
            "UntrainedColleague" => ParticipantGroup::UntrainedColleague,
            "Experienced" => ParticipantGroup::Experienced,
            other => ParticipantGroup::Other(other.to_string()),
        }
    }
}

impl fmt::Display for ParticipantGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ParticipantGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ParticipantGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(ParticipantGroup::parse(&s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferFault {
    MechanicalMisalignment,
    ElectricalConnector,
    SoftwareComm,
}

/// One detach/reattach cycle. Successful iff no fault was recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferCycle {
    pub participant_id: String,
    pub group: ParticipantGroup,
    pub duration_s: f64,
    pub faults: BTreeSet<TransferFault>,
}

impl TransferCycle {
    pub fn is_success(&self) -> bool {
        self.faults.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Force,
    Tangential,
    Pull,
    Power,
    VoltageCurrent,
}

impl TraceKind {
    /// CSV header carrying the units of this kind.
    pub fn csv_header(self) -> &'static [&'static str] {
        match self {
            TraceKind::Force => &["t_s", "f_N"],
            TraceKind::Tangential => &["t_s", "tan_N"],
            TraceKind::Pull => &["t_s", "pull_N"],
            TraceKind::Power => &["t_s", "p_W"],
            TraceKind::VoltageCurrent => &["t_s", "u_V", "i_A"],
        }
    }

    pub fn from_csv_header(header: &[&str]) -> Option<Self> {
        [
            TraceKind::Force,
            TraceKind::Tangential,
            TraceKind::Pull,
            TraceKind::Power,
            TraceKind::VoltageCurrent,
        ]
        .into_iter()
        .find(|k| k.csv_header() == header)
    }

    pub fn is_power(self) -> bool {
        matches!(self, TraceKind::Power | TraceKind::VoltageCurrent)
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TraceKind::Force => "force",
            TraceKind::Tangential => "tangential",
            TraceKind::Pull => "pull",
            TraceKind::Power => "power",
            TraceKind::VoltageCurrent => "voltage_current",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Channels {
    Scalar(Vec<f64>),
    VoltageCurrent { volts: Vec<f64>, amps: Vec<f64> },
}

/// A timestamped series. Voltage/current traces expose their power through
/// [`SampledTrace::values`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrace {
    kind: TraceKind,
    times: Vec<f64>,
    channels: Channels,
    phase_marks: Option<Vec<PhaseMark>>,
}

impl SampledTrace {
    pub fn scalar(kind: TraceKind, times: Vec<f64>, values: Vec<f64>) -> Result<Self, ModelError> {
        if kind == TraceKind::VoltageCurrent {
            return Err(ModelError::NotScalar(kind));
        }
        if values.len() != times.len() {
            return Err(ModelError::LengthMismatch {
                expected: times.len(),
                found: values.len(),
            });
        }
        Ok(Self {
            kind,
            times,
            channels: Channels::Scalar(values),
            phase_marks: None,
        })
    }

    pub fn voltage_current(
        times: Vec<f64>,
        volts: Vec<f64>,
        amps: Vec<f64>,
    ) -> Result<Self, ModelError> {
        for found in [volts.len(), amps.len()] {
            if found != times.len() {
                return Err(ModelError::LengthMismatch {
                    expected: times.len(),
                    found,
                });
            }
        }
        Ok(Self {
            kind: TraceKind::VoltageCurrent,
            times,
            channels: Channels::VoltageCurrent { volts, amps },
            phase_marks: None,
        })
    }

    pub fn with_phase_marks(mut self, marks: Option<Vec<PhaseMark>>) -> Self {
        self.phase_marks = marks;
        self
    }

    pub fn kind(&self) -> TraceKind {
        self.kind
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn channels(&self) -> &Channels {
        &self.channels
    }

    pub fn phase_marks(&self) -> Option<&[PhaseMark]> {
        self.phase_marks.as_deref()
    }

    /// Scalar view of the trace: the single channel, or `U·I` pointwise.
    pub fn values(&self) -> Cow<'_, [f64]> {
        match &self.channels {
            Channels::Scalar(v) => Cow::Borrowed(v),
            Channels::VoltageCurrent { volts, amps } => {
                Cow::Owned(volts.iter().zip(amps).map(|(u, i)| u * i).collect())
            }
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> Option<f64> {
        self.times.first().copied()
    }

    pub fn end(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn duration(&self) -> f64 {
        match (self.start(), self.end()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.times.windows(2).all(|w| w[0] < w[1])
    }

    pub fn all_finite(&self) -> bool {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        finite(&self.times)
            && match &self.channels {
                Channels::Scalar(v) => finite(v),
                Channels::VoltageCurrent { volts, amps } => finite(volts) && finite(amps),
            }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    Approach,
    Grasp,
    Hold,
    Release,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Approach => "Approach",
            Phase::Grasp => "Grasp",
            Phase::Hold => "Hold",
            Phase::Release => "Release",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Approach" => Some(Phase::Approach),
            "Grasp" => Some(Phase::Grasp),
            "Hold" => Some(Phase::Hold),
            "Release" => Some(Phase::Release),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMark {
    pub phase: Phase,
    pub t_start: f64,
    pub t_end: f64,
}

impl PhaseMark {
    pub fn new(phase: Phase, t_start: f64, t_end: f64) -> Self {
        Self {
            phase,
            t_start,
            t_end,
        }
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// Marks must be well-formed intervals, ordered and non-overlapping.
pub fn phase_marks_well_formed(marks: &[PhaseMark]) -> bool {
    marks
        .iter()
        .all(|m| m.t_start.is_finite() && m.t_end.is_finite() && m.t_start < m.t_end)
        && marks.windows(2).all(|w| w[0].t_end <= w[1].t_start)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Compliance {
    #[serde(rename = "R")]
    R,
    #[serde(rename = "1S")]
    S1,
    #[serde(rename = "2S")]
    S2,
    #[serde(rename = "F")]
    F,
}

impl Compliance {
    pub fn code(self) -> &'static str {
        match self {
            Compliance::R => "R",
            Compliance::S1 => "1S",
            Compliance::S2 => "2S",
            Compliance::F => "F",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GripType {
    #[serde(rename = "W")]
    Wrap,
    #[serde(rename = "P")]
    Pinch,
}

impl GripType {
    pub fn code(self) -> &'static str {
        match self {
            GripType::Wrap => "W",
            GripType::Pinch => "P",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GripType::Wrap => "wrap",
            GripType::Pinch => "pinch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdealShape {
    #[serde(rename = "C")]
    Cylinder,
    #[serde(rename = "B")]
    Box,
    #[serde(rename = "S")]
    Sphere,
}

impl IdealShape {
    pub fn code(self) -> &'static str {
        match self {
            IdealShape::Cylinder => "C",
            IdealShape::Box => "B",
            IdealShape::Sphere => "S",
        }
    }
}

/// Ideal-payload classification of a gripper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GripperProfile {
    pub compliance: Compliance,
    pub grip_type: GripType,
    pub ideal_shape: IdealShape,
    /// Reliable gripping range `[min, max]` in millimeters.
    pub range_mm: [f64; 2],
}

impl GripperProfile {
    /// Compact code such as `2S-P-B`.
    pub fn code(&self) -> String {
        format!(
            "{}-{}-{}",
            self.compliance.code(),
            self.grip_type.code(),
            self.ideal_shape.code()
        )
    }
}

/// One row of the trial index for the trace-based metric families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Trial {
    CycleTime {
        artifact: String,
        t_start_s: f64,
        t_stop_s: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grasp_type: Option<GripType>,
    },
    GraspStrength {
        artifact: String,
        finger_traces: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grasp_type: Option<GripType>,
    },
    Slip {
        artifact: String,
        trace: String,
        /// Sum of finger normal forces during the pull, when measured.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        normal_force_n: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        applied_torque_nm: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grasp_type: Option<GripType>,
    },
    Energy {
        trace: String,
        object_mass_g: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_hold_nominal_s: Option<f64>,
    },
    Payload {
        artifact: String,
        trace: String,
    },
}

impl Trial {
    pub fn artifact(&self) -> Option<&str> {
        match self {
            Trial::CycleTime { artifact, .. }
            | Trial::GraspStrength { artifact, .. }
            | Trial::Slip { artifact, .. }
            | Trial::Payload { artifact, .. } => Some(artifact),
            Trial::Energy { .. } => None,
        }
    }

    pub fn trace_ids(&self) -> Vec<&str> {
        match self {
            Trial::CycleTime { .. } => Vec::new(),
            Trial::GraspStrength { finger_traces, .. } => {
                finger_traces.iter().map(String::as_str).collect()
            }
            Trial::Slip { trace, .. } | Trial::Energy { trace, .. } | Trial::Payload { trace, .. } => {
                vec![trace.as_str()]
            }
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Trial::CycleTime { .. } => "cycle_time",
            Trial::GraspStrength { .. } => "grasp_strength",
            Trial::Slip { .. } => "slip",
            Trial::Energy { .. } => "energy",
            Trial::Payload { .. } => "payload",
        }
    }

    fn accepts(&self, kind: TraceKind) -> bool {
        match self {
            Trial::CycleTime { .. } => false,
            Trial::GraspStrength { .. } => kind == TraceKind::Force,
            Trial::Slip { .. } => matches!(kind, TraceKind::Tangential | TraceKind::Pull),
            Trial::Energy { .. } => kind.is_power(),
            Trial::Payload { .. } => kind == TraceKind::Pull,
        }
    }
}

/// Median, quartiles and a bootstrap interval for the median.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStat {
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub ci95: (f64, f64),
    pub method: String,
}

impl SummaryStat {
    pub const METHOD: &'static str = "bootstrap-percentile";

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// A binomial success proportion with its Wilson interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub point: f64,
    pub wilson95: (f64, f64),
}

/// A broken invariant, reported as data.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Violation {
    pub record: String,
    pub invariant: String,
}

impl Violation {
    fn new(record: impl Into<String>, invariant: &str) -> Self {
        Self {
            record: record.into(),
            invariant: invariant.to_string(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.record, self.invariant)
    }
}

pub mod invariant {
    pub const SCHEMA_VERSION: &str = "unsupported schema version";
    pub const EMPTY_NAME: &str = "gripper and platform names non-empty";
    pub const GRIPPING_RANGE: &str = "gripping range min < max";
    pub const ARTIFACT_ID: &str = "artifact id matches its key";
    pub const ARTIFACT_DIMENSION: &str = "characteristic dimension > 0";
    pub const ARTIFACT_MASS: &str = "mass >= 0";
    pub const FINGER_LENGTH: &str = "finger length > 0";
    pub const TIMESTAMPS: &str = "timestamps strictly increasing";
    pub const FINITE: &str = "finite sample values";
    pub const TOO_FEW_SAMPLES: &str = "at least 2 samples for integration";
    pub const PHASE_MARKS: &str = "phase marks ordered and non-overlapping";
    pub const DANGLING_TRACE: &str = "dangling trace reference";
    pub const DANGLING_ARTIFACT: &str = "dangling artifact reference";
    pub const TRACE_KIND: &str = "trace kind matches trial family";
    pub const DUPLICATE_ATTEMPT: &str = "attempt key unique within session";
    pub const INDEX_FROM_ONE: &str = "pose and attempt indices >= 1";
    pub const EVENT_ORDER: &str = "event timestamps ordered after grasp command";
    pub const OVERRIDE: &str = "outcome override consistent with events";
    pub const DURATION: &str = "duration > 0";
    pub const CYCLE_ORDER: &str = "stop time after start time";
    pub const NORMAL_FORCE: &str = "normal force > 0";
    pub const TORQUE: &str = "applied torque > 0 with finger length present";
    pub const MASS: &str = "object mass > 0";
    pub const NO_FINGERS: &str = "at least one finger trace";
}

/// Checks every model invariant. An empty result means the session can be
/// handed to any metric family.
pub fn validate_session(session: &Session) -> Vec<Violation> {
    use invariant as inv;
    let mut out = Vec::new();

    let m = &session.manifest;
    if !SUPPORTED_SCHEMA_VERSIONS.contains(&m.schema_version.as_str()) {
        out.push(Violation::new("manifest", inv::SCHEMA_VERSION));
    }
    if m.gripper_name.trim().is_empty() || m.platform_name.trim().is_empty() {
        out.push(Violation::new("manifest", inv::EMPTY_NAME));
    }
    if let Some(p) = &m.gripper_profile {
        if !(p.range_mm[0] < p.range_mm[1]) {
            out.push(Violation::new("manifest.gripper_profile", inv::GRIPPING_RANGE));
        }
    }

    for (id, a) in &session.artifacts {
        let rec = format!("artifact {id}");
        if &a.artifact_id != id {
            out.push(Violation::new(&rec, inv::ARTIFACT_ID));
        }
        if !(a.characteristic_dimension_mm > 0.0) || !a.characteristic_dimension_mm.is_finite() {
            out.push(Violation::new(&rec, inv::ARTIFACT_DIMENSION));
        }
        if !(a.mass_g >= 0.0) || !a.mass_g.is_finite() {
            out.push(Violation::new(&rec, inv::ARTIFACT_MASS));
        }
        if let Some(l) = a.finger_length_m {
            if !(l > 0.0) || !l.is_finite() {
                out.push(Violation::new(&rec, inv::FINGER_LENGTH));
            }
        }
    }

    for (id, t) in &session.traces {
        let rec = format!("trace {id}");
        if !t.all_finite() {
            out.push(Violation::new(&rec, inv::FINITE));
        }
        if !t.is_strictly_increasing() {
            out.push(Violation::new(&rec, inv::TIMESTAMPS));
        }
        if let Some(marks) = t.phase_marks() {
            if !phase_marks_well_formed(marks) {
                out.push(Violation::new(&rec, inv::PHASE_MARKS));
            }
        }
    }

    let mut keys = HashSet::new();
    for a in &session.attempts {
        let rec = format!(
            "attempt ({}, {}, {})",
            a.object_id, a.pose_index, a.attempt_index
        );
        if !keys.insert((a.object_id.as_str(), a.pose_index, a.attempt_index)) {
            out.push(Violation::new(&rec, inv::DUPLICATE_ATTEMPT));
        }
        if a.pose_index < 1 || a.attempt_index < 1 {
            out.push(Violation::new(&rec, inv::INDEX_FROM_ONE));
        }
        if !events_ordered(&a.events) {
            out.push(Violation::new(&rec, inv::EVENT_ORDER));
        } else if crate::metrics::classify_attempt(a).is_err() {
            out.push(Violation::new(&rec, inv::OVERRIDE));
        }
        if let Some(tid) = &a.trace_id {
            if !session.traces.contains_key(tid) {
                out.push(Violation::new(&rec, inv::DANGLING_TRACE));
            }
        }
    }

    for c in &session.transfer_cycles {
        if !(c.duration_s > 0.0) || !c.duration_s.is_finite() {
            out.push(Violation::new(
                format!("transfer cycle {}", c.participant_id),
                inv::DURATION,
            ));
        }
    }

    for (i, trial) in session.trials.iter().enumerate() {
        let rec = format!("trial {} ({})", i + 1, trial.family());
        if let Some(aid) = trial.artifact() {
            if !session.artifacts.contains_key(aid) {
                out.push(Violation::new(&rec, inv::DANGLING_ARTIFACT));
            }
        }
        for tid in trial.trace_ids() {
            match session.traces.get(tid) {
                None => out.push(Violation::new(&rec, inv::DANGLING_TRACE)),
                Some(t) => {
                    if !trial.accepts(t.kind()) {
                        out.push(Violation::new(&rec, inv::TRACE_KIND));
                    }
                    if t.len() < 2 {
                        out.push(Violation::new(&rec, inv::TOO_FEW_SAMPLES));
                    }
                }
            }
        }
        match trial {
            Trial::CycleTime {
                t_start_s, t_stop_s, ..
            } => {
                if !(t_stop_s > t_start_s) || !t_start_s.is_finite() || !t_stop_s.is_finite() {
                    out.push(Violation::new(&rec, inv::CYCLE_ORDER));
                }
            }
            Trial::GraspStrength { finger_traces, .. } => {
                if finger_traces.is_empty() {
                    out.push(Violation::new(&rec, inv::NO_FINGERS));
                }
            }
            Trial::Slip {
                artifact,
                normal_force_n,
                applied_torque_nm,
                ..
            } => {
                if let Some(n) = normal_force_n {
                    if !(*n > 0.0) || !n.is_finite() {
                        out.push(Violation::new(&rec, inv::NORMAL_FORCE));
                    }
                }
                if let Some(ta) = applied_torque_nm {
                    let has_len = session
                        .artifacts
                        .get(artifact)
                        .is_some_and(|a| a.finger_length_m.is_some());
                    if !(*ta > 0.0) || !ta.is_finite() || !has_len {
                        out.push(Violation::new(&rec, inv::TORQUE));
                    }
                }
            }
            Trial::Energy {
                object_mass_g,
                t_hold_nominal_s,
                ..
            } => {
                if !(*object_mass_g > 0.0) || !object_mass_g.is_finite() {
                    out.push(Violation::new(&rec, inv::MASS));
                }
                if let Some(h) = t_hold_nominal_s {
                    if !(*h > 0.0) || !h.is_finite() {
                        out.push(Violation::new(&rec, inv::DURATION));
                    }
                }
            }
            Trial::Payload { .. } => {}
        }
    }

    out
}

fn events_ordered(e: &AttemptEvents) -> bool {
    let t0 = e.t_grasp_cmd;
    if !t0.is_finite() {
        return false;
    }
    let after = |t: Option<f64>| t.map_or(true, |t| t.is_finite() && t >= t0);
    if !after(e.t_lift_5cm) || !after(e.t_release_done) {
        return false;
    }
    if let Some(h) = e.hold_duration {
        if !(h >= 0.0) || !h.is_finite() {
            return false;
        }
    }
    match (e.t_lift_5cm, e.t_release_done) {
        (Some(l), Some(r)) => l <= r,
        _ => true,
    }
}
