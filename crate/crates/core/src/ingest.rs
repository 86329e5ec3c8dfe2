//! On-disk session bundles.
//!
//! A bundle is a directory holding
//!
//! ```text
//! session.json          manifest, gripper profile, artifacts, trace list, trial index
//! attempts.csv          grasp attempts (optional)
//! transfers.csv         transfer cycles (optional)
//! traces/<id>.csv       one file per trace, header carries the units
//! traces/<id>.phases.csv  optional phase marks for a trace
//! ```
//!
//! Numbers are always written with `.` as decimal separator and parsed the
//! same way regardless of locale. Loading either returns a session that
//! passes [`validate_session`] or fails without returning partial data.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::model::{
    validate_session, ArtifactSpec, AttemptEvents, Channels, GraspAttempt, GripperProfile, Manifest,
    Outcome, ParticipantGroup, Phase, PhaseMark, SampledTrace, Session, TraceKind, TransferCycle,
    TransferFault, Trial, Violation, SUPPORTED_SCHEMA_VERSIONS,
};

pub const MANIFEST_FILE: &str = "session.json";
pub const ATTEMPTS_FILE: &str = "attempts.csv";
pub const TRANSFERS_FILE: &str = "transfers.csv";
pub const TRACES_DIR: &str = "traces";

const ATTEMPT_COLUMNS: [&str; 9] = [
    "object_id",
    "pose_index",
    "attempt_index",
    "t_grasp_cmd_s",
    "t_lift5cm_s",
    "hold_duration_s",
    "slip",
    "t_release_done_s",
    "outcome_override",
];
const ATTEMPT_TRACE_COLUMN: &str = "trace_id";
const TRANSFER_COLUMNS: [&str; 6] = [
    "participant_id",
    "group",
    "duration_s",
    "fault_mech",
    "fault_elec",
    "fault_sw",
];
const PHASE_COLUMNS: [&str; 3] = ["phase", "t_start_s", "t_end_s"];

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("no {MANIFEST_FILE} in {0}")]
    MissingManifest(PathBuf),
    #[error("schema version `{0}` is not supported (this build reads {supported})", supported = SUPPORTED_SCHEMA_VERSIONS.join(", "))]
    SchemaVersionUnsupported(String),
    #[error("{file}:{line}{}: {reason}", column.map(|c| format!(":{c}")).unwrap_or_default())]
    Parse {
        file: String,
        line: u64,
        column: Option<usize>,
        reason: String,
    },
    #[error("{file}: expected header `{expected}`, found `{found}`")]
    Unit {
        file: String,
        expected: String,
        found: String,
    },
    #[error("trace id `{0}` cannot be used as a file name")]
    InvalidTraceId(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("session violates {} invariant(s): {}", .0.len(), join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestFile {
    schema_version: String,
    gripper_name: String,
    platform_name: String,
    #[serde(default)]
    gripper_profile: Option<GripperProfile>,
    #[serde(default)]
    notes: Option<String>,
    #[serde(default)]
    artifacts: Vec<ArtifactSpec>,
    #[serde(default)]
    traces: Vec<TraceEntry>,
    #[serde(default)]
    trials: Vec<Trial>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceEntry {
    id: String,
    kind: TraceKind,
}

fn valid_trace_id(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && !id.ends_with(".phases")
        && id
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn trace_path(root: &Path, id: &str) -> PathBuf {
    root.join(TRACES_DIR).join(format!("{id}.csv"))
}

fn phases_path(root: &Path, id: &str) -> PathBuf {
    root.join(TRACES_DIR).join(format!("{id}.phases.csv"))
}

fn rel(root: &Path, path: &Path) -> String {
    path.strip_prefix(root)
        .unwrap_or(path)
        .to_string_lossy()
        .replace('\\', "/")
}

/// Parses and validates the bundle at `dir`.
pub fn load_session(dir: impl AsRef<Path>) -> Result<Session, IngestError> {
    let session = read_session(dir)?;
    let violations = validate_session(&session);
    if violations.is_empty() {
        Ok(session)
    } else {
        Err(IngestError::Invalid(violations))
    }
}

/// Parses the bundle at `dir` without checking model invariants.
pub fn read_session(dir: impl AsRef<Path>) -> Result<Session, IngestError> {
    let root = dir.as_ref();
    let manifest_path = root.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(IngestError::MissingManifest(root.to_path_buf()));
    }
    let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
    let mf = parse_manifest(&text)?;

    let mut session = Session::new(Manifest {
        schema_version: mf.schema_version,
        gripper_name: mf.gripper_name,
        platform_name: mf.platform_name,
        gripper_profile: mf.gripper_profile,
        operator_notes: mf.notes,
    });
    for a in mf.artifacts {
        if session.artifacts.contains_key(&a.artifact_id) {
            return Err(manifest_error(format!("duplicate artifact `{}`", a.artifact_id)));
        }
        session.artifacts.insert(a.artifact_id.clone(), a);
    }
    for entry in mf.traces {
        if !valid_trace_id(&entry.id) {
            return Err(IngestError::InvalidTraceId(entry.id));
        }
        if session.traces.contains_key(&entry.id) {
            return Err(manifest_error(format!("duplicate trace `{}`", entry.id)));
        }
        let trace = read_trace(root, &entry.id, entry.kind)?;
        session.traces.insert(entry.id, trace);
    }
    session.trials = mf.trials;

    let attempts = root.join(ATTEMPTS_FILE);
    if attempts.is_file() {
        session.attempts = read_attempts(root, &attempts)?;
    }
    let transfers = root.join(TRANSFERS_FILE);
    if transfers.is_file() {
        session.transfer_cycles = read_transfers(root, &transfers)?;
    }
    Ok(session)
}

fn manifest_error(reason: String) -> IngestError {
    IngestError::Parse {
        file: MANIFEST_FILE.into(),
        line: 0,
        column: None,
        reason,
    }
}

fn parse_manifest(text: &str) -> Result<ManifestFile, IngestError> {
    let json_err = |e: serde_json::Error| IngestError::Parse {
        file: MANIFEST_FILE.into(),
        line: e.line() as u64,
        column: Some(e.column()),
        reason: e.to_string(),
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(json_err)?;
    match value.get("schema_version").and_then(|v| v.as_str()) {
        Some(v) if SUPPORTED_SCHEMA_VERSIONS.contains(&v) => {}
        Some(v) => return Err(IngestError::SchemaVersionUnsupported(v.to_string())),
        None => return Err(manifest_error("missing string field `schema_version`".into())),
    }
    serde_json::from_str(text).map_err(json_err)
}

struct CsvFile {
    name: String,
    header: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

fn read_csv(root: &Path, path: &Path) -> Result<CsvFile, IngestError> {
    let name = rel(root, path);
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let csv_err = |name: &str, e: csv::Error| IngestError::Parse {
        file: name.to_string(),
        line: e.position().map(|p| p.line()).unwrap_or(0),
        column: None,
        reason: e.to_string(),
    };
    let header = reader
        .headers()
        .map_err(|e| csv_err(&name, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(&name, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        rows.push((line, rec));
    }
    Ok(CsvFile { name, header, rows })
}

impl CsvFile {
    fn expect_header(&self, expected: &[&str]) -> Result<(), IngestError> {
        if self.header.iter().map(String::as_str).eq(expected.iter().copied()) {
            Ok(())
        } else {
            Err(IngestError::Unit {
                file: self.name.clone(),
                expected: expected.join(","),
                found: self.header.join(","),
            })
        }
    }

    fn error(&self, line: u64, column: usize, reason: impl Into<String>) -> IngestError {
        IngestError::Parse {
            file: self.name.clone(),
            line,
            column: Some(column + 1),
            reason: reason.into(),
        }
    }

    fn field<'r>(&self, line: u64, rec: &'r csv::StringRecord, col: usize) -> Result<&'r str, IngestError> {
        rec.get(col)
            .ok_or_else(|| self.error(line, col, format!("missing column `{}`", self.header[col])))
    }

    fn real(&self, line: u64, rec: &csv::StringRecord, col: usize) -> Result<f64, IngestError> {
        let s = self.field(line, rec, col)?;
        parse_real(s).ok_or_else(|| self.error(line, col, format!("`{s}` is not a finite decimal number")))
    }

    fn opt_real(&self, line: u64, rec: &csv::StringRecord, col: usize) -> Result<Option<f64>, IngestError> {
        if self.field(line, rec, col)?.is_empty() {
            Ok(None)
        } else {
            self.real(line, rec, col).map(Some)
        }
    }

    fn index(&self, line: u64, rec: &csv::StringRecord, col: usize) -> Result<u32, IngestError> {
        let s = self.field(line, rec, col)?;
        s.parse()
            .map_err(|_| self.error(line, col, format!("`{s}` is not a non-negative integer")))
    }

    fn flag(&self, line: u64, rec: &csv::StringRecord, col: usize) -> Result<bool, IngestError> {
        match self.field(line, rec, col)? {
            "0" => Ok(false),
            "1" => Ok(true),
            s => Err(self.error(line, col, format!("`{s}` is not 0 or 1"))),
        }
    }
}

/// Decimal number with `.` separator. Rejects NaN and infinities.
fn parse_real(s: &str) -> Option<f64> {
    let ok = !s.is_empty()
        && s
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'));
    if !ok {
        return None;
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn read_trace(root: &Path, id: &str, kind: TraceKind) -> Result<SampledTrace, IngestError> {
    let path = trace_path(root, id);
    if !path.is_file() {
        return Err(IngestError::Parse {
            file: MANIFEST_FILE.into(),
            line: 0,
            column: None,
            reason: format!("trace `{id}` has no file {}", rel(root, &path)),
        });
    }
    let csv = read_csv(root, &path)?;
    csv.expect_header(kind.csv_header())?;
    let width = kind.csv_header().len();
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(csv.rows.len()); width];
    for (line, rec) in &csv.rows {
        for (c, col) in cols.iter_mut().enumerate() {
            col.push(csv.real(*line, rec, c)?);
        }
    }
    let mut cols = cols.into_iter();
    let times = cols.next().unwrap_or_default();
    let trace = match kind {
        TraceKind::VoltageCurrent => {
            let volts = cols.next().unwrap_or_default();
            let amps = cols.next().unwrap_or_default();
            SampledTrace::voltage_current(times, volts, amps)
        }
        _ => SampledTrace::scalar(kind, times, cols.next().unwrap_or_default()),
    }
    .map_err(|e| csv.error(0, 0, e.to_string()))?;

    let phases = phases_path(root, id);
    let marks = if phases.is_file() {
        Some(read_phases(root, &phases)?)
    } else {
        None
    };
    Ok(trace.with_phase_marks(marks))
}

fn read_phases(root: &Path, path: &Path) -> Result<Vec<PhaseMark>, IngestError> {
    let csv = read_csv(root, path)?;
    csv.expect_header(&PHASE_COLUMNS)?;
    csv.rows
        .iter()
        .map(|(line, rec)| {
            let name = csv.field(*line, rec, 0)?;
            let phase = Phase::parse(name)
                .ok_or_else(|| csv.error(*line, 0, format!("unknown phase `{name}`")))?;
            Ok(PhaseMark::new(
                phase,
                csv.real(*line, rec, 1)?,
                csv.real(*line, rec, 2)?,
            ))
        })
        .collect()
}

fn read_attempts(root: &Path, path: &Path) -> Result<Vec<GraspAttempt>, IngestError> {
    let csv = read_csv(root, path)?;
    let with_trace = csv.header.len() == ATTEMPT_COLUMNS.len() + 1;
    if with_trace {
        let mut expected = ATTEMPT_COLUMNS.to_vec();
        expected.push(ATTEMPT_TRACE_COLUMN);
        csv.expect_header(&expected)?;
    } else {
        csv.expect_header(&ATTEMPT_COLUMNS)?;
    }
    csv.rows
        .iter()
        .map(|(line, rec)| {
            let line = *line;
            let object_id = csv.field(line, rec, 0)?.to_string();
            if object_id.is_empty() {
                return Err(csv.error(line, 0, "empty object_id"));
            }
            let outcome_override = match csv.field(line, rec, 8)? {
                "" => None,
                "success" | "Success" | "1" => Some(Outcome::Success),
                "failure" | "Failure" | "0" => Some(Outcome::Failure),
                s => return Err(csv.error(line, 8, format!("`{s}` is not success or failure"))),
            };
            let trace_id = if with_trace {
                Some(csv.field(line, rec, 9)?)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
            } else {
                None
            };
            Ok(GraspAttempt {
                object_id,
                pose_index: csv.index(line, rec, 1)?,
                attempt_index: csv.index(line, rec, 2)?,
                events: AttemptEvents {
                    t_grasp_cmd: csv.real(line, rec, 3)?,
                    t_lift_5cm: csv.opt_real(line, rec, 4)?,
                    hold_duration: csv.opt_real(line, rec, 5)?,
                    slip_during_hold: csv.flag(line, rec, 6)?,
                    t_release_done: csv.opt_real(line, rec, 7)?,
                },
                outcome_override,
                trace_id,
            })
        })
        .collect()
}

fn read_transfers(root: &Path, path: &Path) -> Result<Vec<TransferCycle>, IngestError> {
    let csv = read_csv(root, path)?;
    csv.expect_header(&TRANSFER_COLUMNS)?;
    let fault_kinds = [
        TransferFault::MechanicalMisalignment,
        TransferFault::ElectricalConnector,
        TransferFault::SoftwareComm,
    ];
    csv.rows
        .iter()
        .map(|(line, rec)| {
            let line = *line;
            let group = csv.field(line, rec, 1)?;
            if group.is_empty() {
                return Err(csv.error(line, 1, "empty group"));
            }
            let mut faults = BTreeSet::new();
            for (k, fault) in fault_kinds.iter().enumerate() {
                if csv.flag(line, rec, 3 + k)? {
                    faults.insert(*fault);
                }
            }
            Ok(TransferCycle {
                participant_id: csv.field(line, rec, 0)?.to_string(),
                group: ParticipantGroup::parse(group),
                duration_s: csv.real(line, rec, 2)?,
                faults,
            })
        })
        .collect()
}

/// Writes `session` as a bundle under `dir`, creating it when needed.
///
/// Optional files with no rows are not written; stale copies from an
/// earlier write are removed so the bundle always reloads to `session`.
pub fn write_session(session: &Session, dir: impl AsRef<Path>) -> Result<(), IngestError> {
    let root = dir.as_ref();
    for id in session.traces.keys() {
        if !valid_trace_id(id) {
            return Err(IngestError::InvalidTraceId(id.clone()));
        }
    }
    let traces_dir = root.join(TRACES_DIR);
    fs::create_dir_all(&traces_dir).map_err(io_err(&traces_dir))?;

    let m = &session.manifest;
    let mf = ManifestFile {
        schema_version: m.schema_version.clone(),
        gripper_name: m.gripper_name.clone(),
        platform_name: m.platform_name.clone(),
        gripper_profile: m.gripper_profile,
        notes: m.operator_notes.clone(),
        artifacts: session.artifacts.values().cloned().collect(),
        traces: session
            .traces
            .iter()
            .map(|(id, t)| TraceEntry {
                id: id.clone(),
                kind: t.kind(),
            })
            .collect(),
        trials: session.trials.clone(),
    };
    let manifest_path = root.join(MANIFEST_FILE);
    let mut json = serde_json::to_string_pretty(&mf).expect("manifest serializes");
    json.push('\n');
    fs::write(&manifest_path, json).map_err(io_err(&manifest_path))?;

    for (id, trace) in &session.traces {
        write_trace(root, id, trace)?;
    }

    let attempts = root.join(ATTEMPTS_FILE);
    if session.attempts.is_empty() {
        remove_if_exists(&attempts)?;
    } else {
        write_attempts(&attempts, &session.attempts)?;
    }
    let transfers = root.join(TRANSFERS_FILE);
    if session.transfer_cycles.is_empty() {
        remove_if_exists(&transfers)?;
    } else {
        write_transfers(&transfers, &session.transfer_cycles)?;
    }
    Ok(())
}

fn remove_if_exists(path: &Path) -> Result<(), IngestError> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != io::ErrorKind::NotFound => Err(io_err(path)(e)),
        _ => Ok(()),
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, IngestError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(path: &Path, w: csv::Writer<fs::File>) -> Result<(), IngestError> {
    w.into_inner()
        .map_err(|e| io_err(path)(e.into_error()))?
        .sync_all()
        .map_err(io_err(path))
}

fn csv_io(path: &Path) -> impl Fn(csv::Error) -> IngestError + '_ {
    move |e| io_err(path)(e.into())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn write_trace(root: &Path, id: &str, trace: &SampledTrace) -> Result<(), IngestError> {
    let path = trace_path(root, id);
    let mut w = csv_writer(&path)?;
    w.write_record(trace.kind().csv_header()).map_err(csv_io(&path))?;
    let t = trace.times();
    match trace.channels() {
        Channels::Scalar(v) => {
            for (x, y) in t.iter().zip(v) {
                w.write_record([x.to_string(), y.to_string()]).map_err(csv_io(&path))?;
            }
        }
        Channels::VoltageCurrent { volts, amps } => {
            for ((x, u), i) in t.iter().zip(volts).zip(amps) {
                w.write_record([x.to_string(), u.to_string(), i.to_string()])
                    .map_err(csv_io(&path))?;
            }
        }
    }
    finish(&path, w)?;

    let phases = phases_path(root, id);
    match trace.phase_marks() {
        None => remove_if_exists(&phases),
        Some(marks) => {
            let mut w = csv_writer(&phases)?;
            w.write_record(PHASE_COLUMNS).map_err(csv_io(&phases))?;
            for m in marks {
                w.write_record([
                    m.phase.as_str().to_string(),
                    m.t_start.to_string(),
                    m.t_end.to_string(),
                ])
                .map_err(csv_io(&phases))?;
            }
            finish(&phases, w)
        }
    }
}

fn write_attempts(path: &Path, attempts: &[GraspAttempt]) -> Result<(), IngestError> {
    let with_trace = attempts.iter().any(|a| a.trace_id.is_some());
    let mut w = csv_writer(path)?;
    let mut header = ATTEMPT_COLUMNS.to_vec();
    if with_trace {
        header.push(ATTEMPT_TRACE_COLUMN);
    }
    w.write_record(&header).map_err(csv_io(path))?;
    for a in attempts {
        let e = &a.events;
        let mut row = vec![
            a.object_id.clone(),
            a.pose_index.to_string(),
            a.attempt_index.to_string(),
            e.t_grasp_cmd.to_string(),
            opt(e.t_lift_5cm),
            opt(e.hold_duration),
            u8::from(e.slip_during_hold).to_string(),
            opt(e.t_release_done),
            match a.outcome_override {
                None => String::new(),
                Some(Outcome::Success) => "success".into(),
                Some(Outcome::Failure) => "failure".into(),
            },
        ];
        if with_trace {
            row.push(a.trace_id.clone().unwrap_or_default());
        }
        w.write_record(&row).map_err(csv_io(path))?;
    }
    finish(path, w)
}

fn write_transfers(path: &Path, cycles: &[TransferCycle]) -> Result<(), IngestError> {
    let mut w = csv_writer(path)?;
    w.write_record(TRANSFER_COLUMNS).map_err(csv_io(path))?;
    for c in cycles {
        w.write_record(transfer_row(c)).map_err(csv_io(path))?;
    }
    finish(path, w)
}

/// One transfers.csv row, without header.
pub fn transfer_row(c: &TransferCycle) -> [String; 6] {
    let flag = |f| u8::from(c.faults.contains(&f)).to_string();
    [
        c.participant_id.clone(),
        c.group.as_str().to_string(),
        c.duration_s.to_string(),
        flag(TransferFault::MechanicalMisalignment),
        flag(TransferFault::ElectricalConnector),
        flag(TransferFault::SoftwareComm),
    ]
}

/// Appends cycles to a transfers.csv file, writing the header when the file
/// is new or empty.
pub fn append_transfers(path: impl AsRef<Path>, cycles: &[TransferCycle]) -> Result<(), IngestError> {
    let path = path.as_ref();
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(TRANSFER_COLUMNS).map_err(csv_io(path))?;
    }
    for c in cycles {
        w.write_record(transfer_row(c)).map_err(csv_io(path))?;
    }
    finish(path, w)
}
