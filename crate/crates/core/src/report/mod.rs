//! Whole-session analysis and report documents.
//!
//! [`analyze`] runs every metric family for which the session has data and
//! echoes the full configuration in the report meta block, so a report can
//! be reproduced from its own JSON.

mod compare;
mod markdown;
mod plot;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use compare::{compare, render_comparison, CompareError, CompareRow, Comparison, FamilyComparison, ReportColumn};
pub use markdown::render_markdown;
pub use plot::{plot_data, plot_session_trace, write_plot_csv, PlotData, PlotError, PlotRow, PLOT_HEADER};

use crate::metrics::{
    self, ArtifactCycleTime, ArtifactKey, ArtifactSlip, ArtifactStrength, EnergyResult, EnergyTrialInput,
    IipbResult, MetricsError, NistResult, PullTrial, TransferResult, YcbResult,
};
use crate::model::{validate_session, GripType, GripperProfile, SampledTrace, Session, Trial, Violation};
use crate::signal::{PhaseInferenceConfig, SlipDetectorConfig};
use crate::stats::{self, BootstrapConfig, StatsError};

pub const REPORT_SCHEMA_VERSION: &str = "cegb-report-1";
pub const TOOL_NAME: &str = "cegb";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

const STREAM_YCB: u64 = 100;
const STREAM_CYCLE: u64 = 200;
const STREAM_STRENGTH: u64 = 300;
const STREAM_SLIP: u64 = 400;
const STREAM_TRANSFER: u64 = 500;
const STREAM_ENERGY: u64 = 600;
const STREAM_IIPB: u64 = 700;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub bootstrap: BootstrapConfig,
    pub slip: SlipDetectorConfig,
    pub phase: PhaseInferenceConfig,
    /// Trailing window averaged for the grasp-strength plateau, seconds.
    pub plateau_window: f64,
    pub strength_smoothing: f64,
    /// Overrides the per-trial nominal hold duration for energy trials.
    pub t_hold_nominal: Option<f64>,
}

impl AnalysisConfig {
    pub fn new(seed: u64, resamples: usize) -> Self {
        Self {
            bootstrap: BootstrapConfig::new(resamples, seed),
            ..Self::default()
        }
    }

    pub fn seed(&self) -> u64 {
        self.bootstrap.seed
    }
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            bootstrap: BootstrapConfig::default(),
            slip: SlipDetectorConfig::default(),
            phase: PhaseInferenceConfig::default(),
            plateau_window: 0.5,
            strength_smoothing: 0.05,
            t_hold_nominal: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub tool: String,
    pub tool_version: String,
    pub report_schema: String,
    pub session_schema: String,
    pub gripper_name: String,
    pub platform_name: String,
    pub gripper_profile: Option<GripperProfile>,
    pub seed: u64,
    pub config: AnalysisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: ReportMeta,
    pub ycb: Option<YcbResult>,
    pub nist: Option<NistResult>,
    pub transfer: Option<TransferResult>,
    pub energy: Option<EnergyResult>,
    pub iipb: Option<IipbResult>,
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Label used for this report in comparisons.
    pub fn label(&self) -> String {
        format!("{} / {}", self.meta.gripper_name, self.meta.platform_name)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("session violates {} invariant(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
    #[error("{family}: {source}")]
    Metrics {
        family: &'static str,
        #[source]
        source: MetricsError,
    },
    #[error("invalid analysis configuration: {0}")]
    Config(String),
    #[error("{family}: trial references missing {what} `{id}`")]
    Missing {
        family: &'static str,
        what: &'static str,
        id: String,
    },
}

impl From<StatsError> for AnalysisError {
    fn from(e: StatsError) -> Self {
        AnalysisError::Config(e.to_string())
    }
}

fn in_family<T>(family: &'static str, r: Result<T, MetricsError>) -> Result<T, AnalysisError> {
    r.map_err(|source| AnalysisError::Metrics { family, source })
}

/// Runs every metric family with data. Families without data stay `None`.
pub fn analyze(session: &Session, cfg: &AnalysisConfig) -> Result<Report, AnalysisError> {
    cfg.bootstrap.validate()?;
    if !(cfg.plateau_window > 0.0) || !(cfg.strength_smoothing > 0.0) {
        return Err(AnalysisError::Config("plateau and smoothing windows must be positive".into()));
    }
    if let Some(t) = cfg.t_hold_nominal {
        if !(t > 0.0) {
            return Err(AnalysisError::Config(format!("t_hold_nominal must be positive, got {t}")));
        }
    }
    let violations = validate_session(session);
    if !violations.is_empty() {
        return Err(AnalysisError::Invalid(violations));
    }
    let b = &cfg.bootstrap;

    let ycb = if session.attempts.is_empty() {
        None
    } else {
        Some(in_family("ycb", metrics::ycb_aggregate(&session.attempts, &b.with_stream(STREAM_YCB)))?)
    };
    let transfer = if session.transfer_cycles.is_empty() {
        None
    } else {
        Some(in_family(
            "transfer",
            metrics::transfer_summary(&session.transfer_cycles, &b.with_stream(STREAM_TRANSFER)),
        )?)
    };

    Ok(Report {
        meta: ReportMeta {
            tool: TOOL_NAME.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            report_schema: REPORT_SCHEMA_VERSION.to_string(),
            session_schema: session.manifest.schema_version.clone(),
            gripper_name: session.manifest.gripper_name.clone(),
            platform_name: session.manifest.platform_name.clone(),
            gripper_profile: session.manifest.gripper_profile,
            seed: cfg.seed(),
            config: *cfg,
        },
        ycb,
        nist: nist(session, cfg)?,
        transfer,
        energy: energy(session, cfg)?,
        iipb: iipb(session, cfg)?,
        violations,
    })
}

fn trace<'a>(session: &'a Session, family: &'static str, id: &str) -> Result<&'a SampledTrace, AnalysisError> {
    session.traces.get(id).ok_or_else(|| AnalysisError::Missing {
        family,
        what: "trace",
        id: id.to_string(),
    })
}

fn artifact_key(session: &Session, family: &'static str, id: &str, grasp: Option<GripType>) -> Result<ArtifactKey, AnalysisError> {
    let spec = session.artifacts.get(id).ok_or_else(|| AnalysisError::Missing {
        family,
        what: "artifact",
        id: id.to_string(),
    })?;
    Ok(ArtifactKey {
        artifact_id: id.to_string(),
        dimension_mm: spec.characteristic_dimension_mm,
        grasp_type: grasp.map(|g| g.label().to_string()),
    })
}

/// Groups items by artifact key, ordered by dimension, then id, then grasp type.
fn group_by_key<T>(items: Vec<(ArtifactKey, T)>) -> Vec<(ArtifactKey, Vec<T>)> {
    let mut groups: Vec<(ArtifactKey, Vec<T>)> = Vec::new();
    for (key, item) in items {
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(item),
            None => groups.push((key, vec![item])),
        }
    }
    groups.sort_by(|(a, _), (b, _)| {
        a.dimension_mm
            .total_cmp(&b.dimension_mm)
            .then_with(|| a.artifact_id.cmp(&b.artifact_id))
            .then_with(|| a.grasp_type.cmp(&b.grasp_type))
    });
    groups
}

fn nist(session: &Session, cfg: &AnalysisConfig) -> Result<Option<NistResult>, AnalysisError> {
    let b = &cfg.bootstrap;
    let (plateau_window, smoothing) = (cfg.plateau_window, cfg.strength_smoothing);
    let mut cycles = Vec::new();
    let mut strengths = Vec::new();
    let mut slips = Vec::new();
    for trial in &session.trials {
        match trial {
            Trial::CycleTime {
                artifact,
                t_start_s,
                t_stop_s,
                grasp_type,
            } => cycles.push((
                artifact_key(session, "cycle_time", artifact, *grasp_type)?,
                (*t_start_s, *t_stop_s),
            )),
            Trial::GraspStrength {
                artifact,
                finger_traces,
                grasp_type,
            } => {
                let fingers = finger_traces
                    .iter()
                    .map(|id| trace(session, "grasp_strength", id))
                    .collect::<Result<Vec<_>, _>>()?;
                strengths.push((artifact_key(session, "grasp_strength", artifact, *grasp_type)?, fingers));
            }
            Trial::Slip {
                artifact,
                trace: id,
                normal_force_n,
                applied_torque_nm,
                grasp_type,
            } => slips.push((
                artifact_key(session, "slip", artifact, *grasp_type)?,
                (trace(session, "slip", id)?, &session.artifacts[artifact], *normal_force_n, *applied_torque_nm),
            )),
            Trial::Energy { .. } | Trial::Payload { .. } => {}
        }
    }
    if cycles.is_empty() && strengths.is_empty() && slips.is_empty() {
        return Ok(None);
    }

    let mut cycle_time = Vec::new();
    for (i, (artifact, trials)) in group_by_key(cycles).into_iter().enumerate() {
        let cfg = b.with_stream(STREAM_CYCLE).with_stream(i as u64);
        cycle_time.push(ArtifactCycleTime {
            artifact,
            cycle_time: in_family("cycle_time", metrics::cycle_time(&trials, &cfg))?,
        });
    }

    let mut grasp_strength = Vec::new();
    for (i, (artifact, trials)) in group_by_key(strengths).into_iter().enumerate() {
        let cfg = b.with_stream(STREAM_STRENGTH).with_stream(i as u64);
        grasp_strength.push(ArtifactStrength {
            artifact,
            strength: in_family(
                "grasp_strength",
                metrics::grasp_strength(&trials, plateau_window, smoothing, &cfg),
            )?,
        });
    }

    let mut slip = Vec::new();
    for (i, (artifact, trials)) in group_by_key(slips).into_iter().enumerate() {
        let base = b.with_stream(STREAM_SLIP).with_stream(i as u64);
        let mut forces = Vec::new();
        let mut mus = Vec::new();
        let mut qs = Vec::new();
        let mut safety = 0;
        for (tr, spec, normal, torque) in trials {
            // A unit normal stands in when none was logged; its mu_eff is dropped.
            let m = in_family("slip", metrics::slip_metrics(tr, normal.unwrap_or(1.0), spec, torque, &cfg.slip))?;
            forces.push(m.onset.f_slip);
            if normal.is_some() {
                mus.push(m.mu_eff);
            }
            qs.extend(m.q_hold);
            safety += usize::from(!m.onset.slipped);
        }
        let summary = |xs: &[f64], s: u64| -> Result<_, AnalysisError> {
            if xs.is_empty() {
                Ok(None)
            } else {
                Ok(Some(stats::summarize(xs, &base.with_stream(s))?))
            }
        };
        slip.push(ArtifactSlip {
            artifact,
            f_slip: stats::summarize(&forces, &base.with_stream(1))?,
            mu_eff: summary(&mus, 2)?,
            q_hold: summary(&qs, 3)?,
            safety_limit_trials: safety,
        });
    }

    Ok(Some(NistResult {
        cycle_time,
        grasp_strength,
        slip,
    }))
}

fn energy(session: &Session, cfg: &AnalysisConfig) -> Result<Option<EnergyResult>, AnalysisError> {
    let mut inputs = Vec::new();
    let mut nominal = BTreeSet::new();
    for trial in &session.trials {
        if let Trial::Energy {
            trace: id,
            object_mass_g,
            t_hold_nominal_s,
        } = trial
        {
            let tr = trace(session, "energy", id)?;
            inputs.push(EnergyTrialInput {
                trace: tr,
                marks: tr.phase_marks(),
                mass_g: *object_mass_g,
            });
            nominal.insert(t_hold_nominal_s.map(f64::to_bits));
        }
    }
    if inputs.is_empty() {
        return Ok(None);
    }
    let t_hold = match cfg.t_hold_nominal {
        Some(t) => Some(t),
        None if nominal.len() == 1 => nominal.into_iter().next().flatten().map(f64::from_bits),
        None => {
            return Err(AnalysisError::Config(
                "energy trials disagree on t_hold_nominal_s; set it in the analysis configuration".into(),
            ))
        }
    };
    let cfg_b = cfg.bootstrap.with_stream(STREAM_ENERGY);
    Ok(Some(in_family(
        "energy",
        metrics::energy_metrics(&inputs, t_hold, &cfg.phase, &cfg_b),
    )?))
}

fn iipb(session: &Session, cfg: &AnalysisConfig) -> Result<Option<IipbResult>, AnalysisError> {
    let mut pulls = Vec::new();
    for trial in &session.trials {
        if let Trial::Payload { artifact, trace: id } = trial {
            let spec = session.artifacts.get(artifact).ok_or_else(|| AnalysisError::Missing {
                family: "payload",
                what: "artifact",
                id: artifact.clone(),
            })?;
            pulls.push(PullTrial {
                trace: trace(session, "payload", id)?,
                artifact: spec,
            });
        }
    }
    if pulls.is_empty() {
        return Ok(None);
    }
    let b = cfg.bootstrap.with_stream(STREAM_IIPB);
    Ok(Some(in_family(
        "payload",
        metrics::iipb_metrics(&pulls, session.manifest.gripper_profile.as_ref(), &cfg.slip, &b),
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Manifest, ParticipantGroup, TraceKind, TransferCycle};
    use crate::synth::gen_replica;

    fn within(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    fn replica_report() -> Report {
        let (s, _) = gen_replica(42).unwrap();
        analyze(&s, &AnalysisConfig::new(42, 500)).unwrap()
    }

    #[test]
    fn replica_report_hits_targets() {
        let r = replica_report();
        let nist = r.nist.as_ref().unwrap();
        let cycle: Vec<f64> = nist.cycle_time.iter().map(|c| c.cycle_time.median).collect();
        assert!(within(cycle[0], 3.91, 0.01) && within(cycle[1], 3.23, 0.01), "{cycle:?}");
        let slip: Vec<f64> = nist.slip.iter().map(|s| s.f_slip.median).collect();
        for (got, want) in slip.iter().zip([6.28, 5.78, 6.24, 3.75]) {
            assert!(within(*got, want, 0.01), "{slip:?}");
        }
        assert!(nist.slip[1].mu_eff.is_some());
        assert!(nist.slip[0].mu_eff.is_none());
        let e = r.energy.as_ref().unwrap();
        assert!(within(e.e_hold10, 1.5, 0.01));
        let p = r.iipb.as_ref().unwrap();
        assert_eq!(p.profile_code, "2S-P-B");
        assert_eq!(p.per_artifact[2].safety_limit_trials, 10);
        assert_eq!(r.transfer.as_ref().unwrap().overall.success.point, 1.0);
        assert!(r.ycb.is_some());
        assert_eq!(r.meta.seed, 42);
    }

    #[test]
    fn json_round_trip_and_determinism() {
        let r = replica_report();
        let json = r.to_json();
        assert_eq!(Report::from_json(&json).unwrap(), r);
        assert_eq!(replica_report().to_json(), json);
    }

    #[test]
    fn transfer_only_session() {
        let mut s = Session::new(Manifest::new("g", "p"));
        s.transfer_cycles = vec![TransferCycle {
            participant_id: "a".into(),
            group: ParticipantGroup::Master,
            duration_s: 12.0,
            faults: Default::default(),
        }];
        let r = analyze(&s, &AnalysisConfig::default()).unwrap();
        assert!(r.transfer.is_some());
        assert!(r.ycb.is_none() && r.nist.is_none() && r.energy.is_none() && r.iipb.is_none());
        let md = render_markdown(&r);
        assert!(md.contains("## Energy consumption\n\nNot measured"));
        let json = r.to_json();
        assert!(json.contains("\"energy\": null"));
    }

    #[test]
    fn invalid_session_is_rejected() {
        let s = Session::new(Manifest::new("", "p"));
        assert!(matches!(analyze(&s, &AnalysisConfig::default()), Err(AnalysisError::Invalid(_))));
        let mut cfg = AnalysisConfig::default();
        cfg.bootstrap.resamples = 10;
        assert!(matches!(
            analyze(&Session::new(Manifest::new("g", "p")), &cfg),
            Err(AnalysisError::Config(_))
        ));
    }

    #[test]
    fn markdown_mirrors_table_layout() {
        let md = render_markdown(&replica_report());
        assert!(md.contains("| Artifact [mm] | Grasp Type | Median [s] | 95% CI [s] | n |"));
        assert!(md.contains("| 50 | pinch | 3.91 |"), "{md}");
        assert!(md.contains("| Compliance Type | Compliant in 2 main axes | 2S |"));
        assert!(md.contains("| Holding 10s | 1.50 |"));
        assert!(md.contains("| 100 (box) | 7.67 |"));
    }

    #[test]
    fn compare_layout_and_errors() {
        let r = replica_report();
        let mut other = r.clone();
        other.meta.gripper_name = "Other".into();
        other.energy = None;
        let c = compare(&[r.clone(), other.clone(), r.clone()]).unwrap();
        assert_eq!(c.columns.len(), 3);
        assert_eq!(c.columns[1].gripper_name, "Other");
        let energy = c.families.iter().find(|f| f.family == "energy").unwrap();
        assert!(energy.rows.iter().all(|row| row.values[1].is_none() && row.deltas[2] == Some(0.0)));
        let md = render_comparison(&c);
        assert!(md.contains("not measured"));
        assert!(matches!(compare(&[r.clone()]), Err(CompareError::TooFewReports(1))));
        other.meta.report_schema = "x".into();
        assert!(matches!(compare(&[r, other]), Err(CompareError::SchemaMismatch { index: 1, .. })));
    }

    #[test]
    fn plot_labels_replica_phases() {
        let (s, _) = gen_replica(1).unwrap();
        let data = plot_session_trace(&s, "power_0", 0.05, &PhaseInferenceConfig::default()).unwrap();
        assert!(data.warning.is_none());
        for label in ["Grasp", "Hold", "Release", "idle"] {
            assert!(data.rows.iter().any(|r| r.phase == label), "{label}");
        }
        assert!(matches!(
            plot_session_trace(&s, "nope", 0.05, &PhaseInferenceConfig::default()),
            Err(PlotError::UnknownTrace(_))
        ));
        assert!(matches!(
            plot_session_trace(&s, "slip_cyl50_0", 0.05, &PhaseInferenceConfig::default()),
            Err(PlotError::NotPower { .. })
        ));
    }

    #[test]
    fn plot_constant_power_is_unsmoothed_and_unknown() {
        let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.01).collect();
        let trace = SampledTrace::scalar(TraceKind::Power, times, vec![0.15; 200]).unwrap();
        let data = plot_data(&trace, 0.05, &PhaseInferenceConfig::default()).unwrap();
        assert!(data.rows.iter().all(|r| r.p_w_raw == r.p_w_smooth && r.phase == "unknown"));
        assert!(data.warning.is_some());
        let mut buf = Vec::new();
        write_plot_csv(&data, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t_s,p_W_raw,p_W_smooth,phase\n"));
    }
}
