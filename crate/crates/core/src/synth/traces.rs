use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::model::{Phase, PhaseMark, SampledTrace, TraceKind};

/// Gap between the two samples that encode a step.
pub const STEP_GAP_S: f64 = 1e-6;

const GRID_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
struct Segment {
    t0: f64,
    t1: f64,
    v0: f64,
    v1: f64,
    /// The jump into this segment ends at `t0` instead of starting there.
    early: bool,
}

/// Piecewise-linear profile sampled on a uniform grid plus every segment
/// edge. A jump between segments becomes two samples `STEP_GAP_S` apart,
/// starting at the boundary unless the later segment was marked with
/// [`Profile::early_step`].
#[derive(Debug, Clone, Default)]
pub(crate) struct Profile {
    segments: Vec<Segment>,
}

impl Profile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn end(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t1)
    }

    pub fn linear(mut self, duration: f64, v0: f64, v1: f64) -> Self {
        let t0 = self.end();
        self.segments.push(Segment {
            t0,
            t1: t0 + duration,
            v0,
            v1,
            early: false,
        });
        self
    }

    /// Moves the jump into the last segment to just before its start, so
    /// the segment itself has no ramp.
    pub fn early_step(mut self) -> Self {
        if let Some(s) = self.segments.last_mut() {
            s.early = true;
        }
        self
    }

    pub fn hold(self, duration: f64, v: f64) -> Self {
        self.linear(duration, v, v)
    }

    pub fn sample(&self, rate: f64) -> (Vec<f64>, Vec<f64>) {
        let mut t = Vec::new();
        let mut v = Vec::new();
        let jumps = |i: usize| i > 0 && self.segments[i - 1].v1 != self.segments[i].v0;
        for (i, s) in self.segments.iter().enumerate() {
            let start = if i == 0 || (jumps(i) && s.early) {
                t.push(s.t0);
                v.push(s.v0);
                s.t0
            } else if jumps(i) {
                t.push(s.t0 + STEP_GAP_S);
                v.push(s.v0);
                s.t0 + STEP_GAP_S
            } else {
                s.t0
            };
            let end = if i + 1 < self.segments.len() && jumps(i + 1) && self.segments[i + 1].early {
                s.t1 - STEP_GAP_S
            } else {
                s.t1
            };
            let mut k = (start * rate).floor() as i64;
            while (k as f64) / rate <= start + GRID_EPS {
                k += 1;
            }
            loop {
                let x = k as f64 / rate;
                if x >= end - GRID_EPS {
                    break;
                }
                t.push(x);
                v.push(s.v0 + (s.v1 - s.v0) * (x - s.t0) / (s.t1 - s.t0));
                k += 1;
            }
            t.push(end);
            v.push(s.v0 + (s.v1 - s.v0) * (end - s.t0) / (s.t1 - s.t0));
        }
        (t, v)
    }
}

pub(crate) fn add_noise(values: &mut [f64], sd: f64, rng: &mut impl Rng) {
    if sd > 0.0 {
        let normal = Normal::new(0.0, sd).expect("noise sd is finite and non-negative");
        for v in values {
            *v += normal.sample(rng);
        }
    }
}

fn check_positive(name: &str, x: f64) -> Result<(), SynthError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(SynthError::InvalidParameter(format!("{name} must be positive, got {x}")))
    }
}

fn check_noise(sd: f64) -> Result<(), SynthError> {
    if sd >= 0.0 && sd.is_finite() {
        Ok(())
    } else {
        Err(SynthError::InvalidParameter(format!("noise sd must be >= 0, got {sd}")))
    }
}

/// Idle time before the first and after the last phase of an energy trace.
pub const ENERGY_IDLE_S: f64 = 0.5;
/// Supply voltage of generated voltage/current traces.
pub const SUPPLY_V: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Grasp, hold and release power, watts.
    pub powers: [f64; 3],
    /// Grasp, hold and release durations, seconds.
    pub durations: [f64; 3],
    pub noise_sd: f64,
    pub rate: f64,
    /// Emit voltage and current channels instead of power.
    pub voltage_current: bool,
}

impl EnergyParams {
    pub fn new(powers: [f64; 3], durations: [f64; 3]) -> Self {
        Self {
            powers,
            durations,
            noise_sd: 0.0,
            rate: 100.0,
            voltage_current: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseEnergyTruth {
    pub e_grasp: f64,
    pub e_hold: f64,
    pub e_release: f64,
    pub e_cycle: f64,
    pub p_hold: f64,
    pub hold_duration: f64,
}

/// Piecewise-constant power through grasp, hold and release, framed by idle
/// spans at the holding level. The trace carries the true phase marks.
pub fn gen_energy(
    p: &EnergyParams,
    rng: &mut impl Rng,
) -> Result<(SampledTrace, PhaseEnergyTruth), SynthError> {
    for (i, d) in p.durations.iter().enumerate() {
        check_positive(["grasp duration", "hold duration", "release duration"][i], *d)?;
    }
    for (i, w) in p.powers.iter().enumerate() {
        if !(*w >= 0.0 && w.is_finite()) {
            return Err(SynthError::InvalidParameter(format!(
                "{} power must be >= 0, got {w}",
                ["grasp", "hold", "release"][i]
            )));
        }
    }
    check_noise(p.noise_sd)?;
    if !(p.rate >= 10.0) {
        return Err(SynthError::InvalidParameter(format!("rate must be >= 10 Hz, got {}", p.rate)));
    }
    let [pg, ph, pr] = p.powers;
    let [dg, dh, dr] = p.durations;
    let profile = Profile::new()
        .hold(ENERGY_IDLE_S, ph)
        .hold(dg, pg)
        .hold(dh, ph)
        .early_step()
        .hold(dr, pr)
        .hold(ENERGY_IDLE_S, ph);
    let (t, mut v) = profile.sample(p.rate);
    add_noise(&mut v, p.noise_sd, rng);

    let g0 = ENERGY_IDLE_S;
    let h0 = g0 + dg;
    let r0 = h0 + dh;
    let marks = vec![
        PhaseMark::new(Phase::Grasp, g0, h0),
        PhaseMark::new(Phase::Hold, h0, r0),
        PhaseMark::new(Phase::Release, r0, r0 + dr),
    ];
    let trace = if p.voltage_current {
        let volts = vec![SUPPLY_V; t.len()];
        let amps = v.iter().map(|w| w / SUPPLY_V).collect();
        SampledTrace::voltage_current(t, volts, amps)?
    } else {
        SampledTrace::scalar(TraceKind::Power, t, v)?
    };
    let (e_grasp, e_hold, e_release) = (pg * dg, ph * dh, pr * dr);
    Ok((
        trace.with_phase_marks(Some(marks)),
        PhaseEnergyTruth {
            e_grasp,
            e_hold,
            e_release,
            e_cycle: e_grasp + e_hold + e_release,
            p_hold: ph,
            hold_duration: dh,
        },
    ))
}

/// Unloaded time before the pull starts.
pub const SLIP_LEAD_S: f64 = 0.2;
/// Time the load stays at its maximum before slipping or the safety stop.
pub const SLIP_DWELL_S: f64 = 0.1;
/// Length of the reduced load after slip.
pub const SLIP_TAIL_S: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlipParams {
    pub f_true: f64,
    /// Loading rate, N/s.
    pub ramp_rate: f64,
    /// Load after slip as a fraction of `f_true`. At 1 or above the trace
    /// ends at the maximum, as when a safety limit stops the pull.
    pub post_drop_level: f64,
    pub noise_sd: f64,
    pub rate: f64,
    pub kind: TraceKind,
}

impl SlipParams {
    pub fn new(f_true: f64) -> Self {
        Self {
            f_true,
            ramp_rate: 2.0,
            post_drop_level: 0.4,
            noise_sd: 0.0,
            rate: 100.0,
            kind: TraceKind::Tangential,
        }
    }

    pub fn slips(&self) -> bool {
        self.post_drop_level < 1.0
    }
}

/// Linear load ramp to `f_true`, a short dwell, then a sustained drop.
pub fn gen_slip(p: &SlipParams, rng: &mut impl Rng) -> Result<SampledTrace, SynthError> {
    check_positive("f_true", p.f_true)?;
    check_positive("ramp_rate", p.ramp_rate)?;
    check_noise(p.noise_sd)?;
    check_positive("rate", p.rate)?;
    if !(p.post_drop_level >= 0.0) {
        return Err(SynthError::InvalidParameter("post_drop_level must be >= 0".into()));
    }
    if !matches!(p.kind, TraceKind::Tangential | TraceKind::Pull) {
        return Err(SynthError::InvalidParameter(format!("slip traces cannot be {}", p.kind)));
    }
    let mut profile = Profile::new()
        .hold(SLIP_LEAD_S, 0.0)
        .linear(p.f_true / p.ramp_rate, 0.0, p.f_true)
        .hold(SLIP_DWELL_S, p.f_true);
    if p.slips() {
        profile = profile.hold(SLIP_TAIL_S, p.post_drop_level * p.f_true);
    }
    let (t, mut v) = profile.sample(p.rate);
    add_noise(&mut v, p.noise_sd, rng);
    Ok(SampledTrace::scalar(p.kind, t, v)?)
}

/// Closing time of a generated finger force trace.
pub const FORCE_RISE_S: f64 = 0.3;
pub const FORCE_SETTLE_S: f64 = 0.2;
pub const FORCE_PLATEAU_S: f64 = 1.5;

/// One finger: rise to `overshoot · plateau`, settle, then hold the plateau.
pub fn gen_finger_force(plateau: f64, overshoot: f64, rate: f64) -> Result<SampledTrace, SynthError> {
    if !(plateau >= 0.0 && plateau.is_finite()) {
        return Err(SynthError::InvalidParameter(format!("plateau force must be >= 0, got {plateau}")));
    }
    check_positive("rate", rate)?;
    let top = plateau * overshoot.max(1.0);
    let (t, v) = Profile::new()
        .linear(FORCE_RISE_S, 0.0, top)
        .linear(FORCE_SETTLE_S, top, plateau)
        .hold(FORCE_PLATEAU_S, plateau)
        .sample(rate);
    Ok(SampledTrace::scalar(TraceKind::Force, t, v)?)
}
