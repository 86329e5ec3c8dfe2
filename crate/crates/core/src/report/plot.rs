use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::model::{SampledTrace, Session, TraceKind};
use crate::signal::{self, PhaseInferenceConfig};

pub const PLOT_HEADER: [&str; 4] = ["t_s", "p_W_raw", "p_W_smooth", "phase"];

/// Label for samples outside every phase.
pub const IDLE: &str = "idle";
/// Label used everywhere when phases could not be determined.
pub const UNKNOWN: &str = "unknown";

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("unknown trace `{0}`")]
    UnknownTrace(String),
    #[error("trace `{id}` is a {kind:?} trace, not electrical power")]
    NotPower { id: String, kind: TraceKind },
    #[error(transparent)]
    Signal(#[from] signal::SignalError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub t_s: f64,
    #[serde(rename = "p_W_raw")]
    pub p_w_raw: f64,
    #[serde(rename = "p_W_smooth")]
    pub p_w_smooth: f64,
    pub phase: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub rows: Vec<PlotRow>,
    /// Set when phases could be neither read nor inferred.
    pub warning: Option<String>,
}

/// Raw and smoothed power with a phase label per sample.
pub fn plot_data(trace: &SampledTrace, smoothing_window: f64, phase_cfg: &PhaseInferenceConfig) -> Result<PlotData, PlotError> {
    let raw = trace.values();
    let smooth = signal::smooth(trace, smoothing_window)?.values().into_owned();
    let (marks, warning) = match signal::segment_phases(trace, trace.phase_marks(), phase_cfg) {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(format!("phases unavailable, labelled `{UNKNOWN}`: {e}"))),
    };
    let rows = trace
        .times()
        .iter()
        .zip(raw.iter().zip(&smooth))
        .map(|(&t, (&r, &s))| {
            let phase = match &marks {
                None => UNKNOWN,
                Some(marks) => marks
                    .iter()
                    .find(|m| m.t_start <= t && t < m.t_end)
                    .map(|m| m.phase.as_str())
                    .unwrap_or(IDLE),
            };
            PlotRow {
                t_s: t,
                p_w_raw: r,
                p_w_smooth: s,
                phase: phase.to_string(),
            }
        })
        .collect();
    Ok(PlotData { rows, warning })
}

/// [`plot_data`] for a trace of a session, which must carry power.
pub fn plot_session_trace(
    session: &Session,
    trace_id: &str,
    smoothing_window: f64,
    phase_cfg: &PhaseInferenceConfig,
) -> Result<PlotData, PlotError> {
    let trace = session
        .traces
        .get(trace_id)
        .ok_or_else(|| PlotError::UnknownTrace(trace_id.to_string()))?;
    if !trace.kind().is_power() {
        return Err(PlotError::NotPower {
            id: trace_id.to_string(),
            kind: trace.kind(),
        });
    }
    plot_data(trace, smoothing_window, phase_cfg)
}

pub fn write_plot_csv<W: io::Write>(data: &PlotData, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in &data.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

impl PlotData {
    pub fn write_to(&self, path: &Path) -> Result<(), PlotError> {
        let file = fs::File::create(path).map_err(|source| PlotError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        write_plot_csv(self, file).map_err(|source| PlotError::Csv {
            path: path.to_path_buf(),
            source,
        })
    }
}
