//! Trace processing: smoothing, power integration, slip onset, peak/plateau
//! extraction and grasp phase segmentation.

use serde::{Deserialize, Serialize};

use crate::model::{
    phase_marks_well_formed, Channels, ModelError, Phase, PhaseMark, SampledTrace, TraceKind,
};
use crate::stats;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SignalError {
    #[error("trace timestamps are not strictly increasing")]
    NonMonotonicTrace,
    #[error("trace has {found} samples, need at least {needed}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("window [{t0}, {t1}] is not inside the trace span [{start}, {end}]")]
    WindowOutOfRange { t0: f64, t1: f64, start: f64, end: f64 },
    #[error("expected a {expected} trace, got {found}")]
    WrongKind { expected: &'static str, found: TraceKind },
    #[error("trace lasts {duration} s, shorter than the {needed} s window")]
    TraceTooShort { duration: f64, needed: f64 },
    #[error("window length must be positive, got {0}")]
    InvalidWindow(f64),
    #[error("invalid detector configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("phase marks must be ordered, non-overlapping intervals")]
    InvalidPhaseMarks,
    #[error("phase inference failed: {0}")]
    PhaseInferenceFailed(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Relative slack for comparisons of sample times against window edges.
const TIME_EPS: f64 = 1e-9;

fn check_monotonic(trace: &SampledTrace) -> Result<(), SignalError> {
    if trace.is_strictly_increasing() {
        Ok(())
    } else {
        Err(SignalError::NonMonotonicTrace)
    }
}

fn check_len(trace: &SampledTrace, needed: usize) -> Result<(), SignalError> {
    if trace.len() < needed {
        Err(SignalError::TooFewSamples {
            needed,
            found: trace.len(),
        })
    } else {
        Ok(())
    }
}

/// Centered moving average over a time window.
///
/// Near the ends the window shrinks symmetrically, so each output stays
/// centered on its own timestamp and linear trends pass through unchanged.
/// Window sums are taken as offsets from the center sample, which keeps a
/// constant signal bit-identical.
pub fn smooth_values(times: &[f64], values: &[f64], window: f64) -> Vec<f64> {
    let n = times.len();
    if n == 0 {
        return Vec::new();
    }
    let (first, last) = (times[0], times[n - 1]);
    let eps = TIME_EPS * window.max(1.0);
    (0..n)
        .map(|i| {
            let t = times[i];
            let half = (window / 2.0).min(t - first).min(last - t);
            let lo = times.partition_point(|&s| s < t - half - eps);
            let hi = times.partition_point(|&s| s <= t + half + eps);
            let center = values[i];
            let offset: f64 = values[lo..hi].iter().map(|v| v - center).sum();
            center + offset / (hi - lo) as f64
        })
        .collect()
}

/// Low-pass filters every channel of a trace; timestamps are unchanged.
pub fn smooth(trace: &SampledTrace, window: f64) -> Result<SampledTrace, SignalError> {
    if !(window > 0.0) {
        return Err(SignalError::InvalidWindow(window));
    }
    check_len(trace, 2)?;
    check_monotonic(trace)?;
    let times = trace.times().to_vec();
    let out = match trace.channels() {
        Channels::Scalar(v) => {
            let s = smooth_values(&times, v, window);
            SampledTrace::scalar(trace.kind(), times, s)?
        }
        Channels::VoltageCurrent { volts, amps } => {
            let u = smooth_values(&times, volts, window);
            let i = smooth_values(&times, amps, window);
            SampledTrace::voltage_current(times, u, i)?
        }
    };
    Ok(out.with_phase_marks(trace.phase_marks().map(<[_]>::to_vec)))
}

fn interpolate(times: &[f64], values: &[f64], x: f64) -> f64 {
    let j = times.partition_point(|&s| s < x);
    if j >= times.len() {
        return values[times.len() - 1];
    }
    if times[j] == x || j == 0 {
        return values[j];
    }
    let (t0, t1) = (times[j - 1], times[j]);
    let (v0, v1) = (values[j - 1], values[j]);
    v0 + (v1 - v0) * (x - t0) / (t1 - t0)
}

/// Trapezoidal integral of `values` over `[t0, t1]`, interpolating linearly
/// at the window edges. Callers guarantee the window lies inside the span.
fn trapezoid(times: &[f64], values: &[f64], t0: f64, t1: f64) -> f64 {
    let first = times.partition_point(|&s| s <= t0);
    let last = times.partition_point(|&s| s < t1);
    let mut prev_t = t0;
    let mut prev_v = interpolate(times, values, t0);
    let mut acc = CompensatedSum::default();
    for k in first..last {
        acc.add(0.5 * (prev_v + values[k]) * (times[k] - prev_t));
        prev_t = times[k];
        prev_v = values[k];
    }
    let end_v = interpolate(times, values, t1);
    acc.add(0.5 * (prev_v + end_v) * (t1 - prev_t));
    acc.total()
}

/// Neumaier summation.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Energy in joules delivered over `[t0, t1]` by a power or
/// voltage/current trace.
pub fn integrate_power(trace: &SampledTrace, t0: f64, t1: f64) -> Result<f64, SignalError> {
    if !trace.kind().is_power() {
        return Err(SignalError::WrongKind {
            expected: "power or voltage/current",
            found: trace.kind(),
        });
    }
    check_len(trace, 2)?;
    check_monotonic(trace)?;
    let (start, end) = (trace.times()[0], trace.times()[trace.len() - 1]);
    if !(t0 < t1) || t0 < start || t1 > end {
        return Err(SignalError::WindowOutOfRange { t0, t1, start, end });
    }
    Ok(trapezoid(trace.times(), &trace.values(), t0, t1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlipDetectorConfig {
    /// Relative drop below the running maximum that marks slip.
    pub drop_fraction: f64,
    /// Minimum time the drop must persist, seconds.
    pub sustain_window: f64,
    pub smoothing_window: f64,
    /// Running maxima below this force (newtons) never start a drop, so
    /// sensor noise on an unloaded fixture is ignored.
    pub noise_floor: f64,
}

impl Default for SlipDetectorConfig {
    fn default() -> Self {
        Self {
            drop_fraction: 0.20,
            sustain_window: 0.1,
            smoothing_window: 0.05,
            noise_floor: 0.5,
        }
    }
}

impl SlipDetectorConfig {
    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.drop_fraction > 0.0 && self.drop_fraction < 1.0) {
            return Err(SignalError::InvalidConfig("drop_fraction must lie in (0, 1)"));
        }
        if !(self.sustain_window > 0.0 && self.smoothing_window > 0.0) {
            return Err(SignalError::InvalidConfig("windows must be positive"));
        }
        if !(self.noise_floor >= 0.0) {
            return Err(SignalError::InvalidConfig("noise_floor must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlipOnset {
    pub t_slip: f64,
    pub f_slip: f64,
    /// False when the load never dropped, i.e. the safety limit was reached.
    pub slipped: bool,
}

/// Finds the force at slip onset in a tangential or pull trace.
///
/// Slip is the first drop of the smoothed force to `(1 - drop_fraction)` of
/// its running maximum or below that persists for `sustain_window`. The
/// onset force is that running maximum. Without such a drop the global
/// maximum is returned.
pub fn detect_slip_onset(trace: &SampledTrace, cfg: &SlipDetectorConfig) -> Result<SlipOnset, SignalError> {
    if !matches!(trace.kind(), TraceKind::Tangential | TraceKind::Pull) {
        return Err(SignalError::WrongKind {
            expected: "tangential or pull",
            found: trace.kind(),
        });
    }
    cfg.validate()?;
    check_len(trace, 2)?;
    check_monotonic(trace)?;
    let t = trace.times();
    let s = smooth_values(t, &trace.values(), cfg.smoothing_window);
    let n = s.len();
    let sustain = cfg.sustain_window - TIME_EPS * cfg.sustain_window.max(1.0);

    let mut max_idx = 0;
    let mut i = 0;
    while i < n {
        let peak = s[max_idx];
        if s[i] > peak {
            max_idx = i;
        } else if peak >= cfg.noise_floor && s[i] <= (1.0 - cfg.drop_fraction) * peak {
            let limit = (1.0 - cfg.drop_fraction) * peak;
            let mut j = i;
            while j < n && s[j] <= limit {
                if t[j] - t[i] >= sustain {
                    return Ok(SlipOnset {
                        t_slip: t[max_idx],
                        f_slip: peak,
                        slipped: true,
                    });
                }
                j += 1;
            }
            i = j;
            continue;
        }
        i += 1;
    }
    Ok(SlipOnset {
        t_slip: t[max_idx],
        f_slip: s[max_idx],
        slipped: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakPlateau {
    pub peak: f64,
    pub plateau: f64,
}

/// Peak of the smoothed force and the median of its final `plateau_window`.
pub fn peak_plateau(
    trace: &SampledTrace,
    plateau_window: f64,
    smoothing_window: f64,
) -> Result<PeakPlateau, SignalError> {
    if trace.kind() != TraceKind::Force {
        return Err(SignalError::WrongKind {
            expected: "force",
            found: trace.kind(),
        });
    }
    if !(plateau_window > 0.0) {
        return Err(SignalError::InvalidWindow(plateau_window));
    }
    check_len(trace, 2)?;
    check_monotonic(trace)?;
    let t = trace.times();
    let duration = trace.duration();
    if duration + TIME_EPS * plateau_window.max(1.0) < plateau_window {
        return Err(SignalError::TraceTooShort {
            duration,
            needed: plateau_window,
        });
    }
    let s = smooth_values(t, &trace.values(), smoothing_window);
    let peak = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = t[t.len() - 1] - plateau_window - TIME_EPS * plateau_window.max(1.0);
    let from = t.partition_point(|&x| x < cut);
    let plateau = stats::median(&s[from..]).expect("plateau window holds at least one sample");
    Ok(PeakPlateau { peak, plateau })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseInferenceConfig {
    pub smoothing_window: f64,
    /// Leading span treated as idle when estimating the baseline, seconds.
    pub baseline_window: f64,
    /// Threshold above baseline, in median absolute deviations.
    pub mad_multiplier: f64,
    /// Active regions shorter than this are discarded as spikes, seconds.
    pub min_region: f64,
}

impl Default for PhaseInferenceConfig {
    fn default() -> Self {
        Self {
            smoothing_window: 0.05,
            baseline_window: 0.2,
            mad_multiplier: 3.0,
            min_region: 0.1,
        }
    }
}

/// Returns the grasp phases of a trace: the explicit marks when given,
/// otherwise marks inferred from the power profile.
///
/// Inference takes the idle baseline as the median of the smoothed power in
/// the leading `baseline_window` and flags samples above baseline plus
/// `mad_multiplier` median absolute deviations. The first active region is
/// the grasp, the last is the release and the hold lies between them. Each
/// region edge is placed where the smoothed power crosses halfway between
/// the baseline and the region's median level.
pub fn segment_phases(
    trace: &SampledTrace,
    marks: Option<&[PhaseMark]>,
    cfg: &PhaseInferenceConfig,
) -> Result<Vec<PhaseMark>, SignalError> {
    if let Some(marks) = marks {
        if !phase_marks_well_formed(marks) {
            return Err(SignalError::InvalidPhaseMarks);
        }
        return Ok(marks.to_vec());
    }
    check_len(trace, 1)?;
    check_monotonic(trace)?;
    let t = trace.times();
    let s = smooth_values(t, &trace.values(), cfg.smoothing_window);

    let idle_end = t.partition_point(|&x| x <= t[0] + cfg.baseline_window);
    let idle = &s[..idle_end.max(1)];
    let baseline = stats::median(idle).map_err(|e| SignalError::PhaseInferenceFailed(e.to_string()))?;
    let deviations: Vec<f64> = idle.iter().map(|v| (v - baseline).abs()).collect();
    let mad = stats::median(&deviations).map_err(|e| SignalError::PhaseInferenceFailed(e.to_string()))?;
    let threshold = baseline + cfg.mad_multiplier * mad;

    let mut regions: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < s.len() {
        if s[i] > threshold {
            let start = i;
            while i + 1 < s.len() && s[i + 1] > threshold {
                i += 1;
            }
            if t[i] - t[start] >= cfg.min_region {
                regions.push((start, i));
            }
        }
        i += 1;
    }
    if regions.len() < 2 {
        return Err(SignalError::PhaseInferenceFailed(format!(
            "found {} active region(s) above {threshold:.4} W, need two",
            regions.len()
        )));
    }

    let edges = |(a, b): (usize, usize)| {
        let level = stats::median(&s[a..=b]).expect("region is non-empty");
        let mid = 0.5 * (baseline + level);
        let crossing = |lo: usize, hi: usize| {
            if s[lo] == s[hi] {
                t[hi]
            } else {
                t[lo] + (mid - s[lo]) / (s[hi] - s[lo]) * (t[hi] - t[lo])
            }
        };
        let rise = (a..=b).find(|&k| s[k] >= mid).unwrap_or(a);
        let fall = (a..=b).rev().find(|&k| s[k] >= mid).unwrap_or(b);
        let start = if rise > 0 && s[rise - 1] < mid {
            crossing(rise - 1, rise)
        } else {
            t[rise]
        };
        let end = if fall + 1 < s.len() && s[fall + 1] < mid {
            crossing(fall, fall + 1)
        } else {
            t[fall]
        };
        (start, end)
    };
    let (g0, g1) = edges(regions[0]);
    let (r0, r1) = edges(regions[regions.len() - 1]);
    let marks = vec![
        PhaseMark::new(Phase::Grasp, g0, g1),
        PhaseMark::new(Phase::Hold, g1, r0),
        PhaseMark::new(Phase::Release, r0, r1),
    ];
    if !phase_marks_well_formed(&marks) {
        return Err(SignalError::PhaseInferenceFailed(
            "inferred phases are degenerate".to_string(),
        ));
    }
    Ok(marks)
}
