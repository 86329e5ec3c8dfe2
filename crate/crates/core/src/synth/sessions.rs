use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::traces::{gen_energy, gen_finger_force, gen_slip, EnergyParams, SlipParams};
use super::{ArtifactTruth, EnergyTruth, GroundTruth, GroupTruth, ObjectTruth, SynthError, TransferTruth, YcbTruth};
use crate::model::{
    ArtifactShape, ArtifactSpec, AttemptEvents, Compliance, GraspAttempt, GripType, GripperProfile, IdealShape,
    Manifest, ParticipantGroup, Session, TraceKind, TransferCycle, TransferFault, Trial,
};
use crate::stats::{derive_seed, rng_from_seed};

fn ms(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Events for one attempt starting at `t0`. Failures pick one broken
/// clause of the success rule at random.
fn attempt_events(t0: f64, success: bool, rng: &mut impl Rng) -> AttemptEvents {
    let lift = t0 + ms(rng.random_range(0.8..2.5));
    let hold = ms(rng.random_range(3.2..5.0));
    let settle = ms(rng.random_range(0.3..1.0));
    let mut e = AttemptEvents {
        t_grasp_cmd: t0,
        t_lift_5cm: Some(lift),
        hold_duration: Some(hold),
        slip_during_hold: false,
        t_release_done: Some(lift + hold + settle),
    };
    if success {
        return e;
    }
    match rng.random_range(0..4) {
        0 => {
            e.t_lift_5cm = None;
            e.hold_duration = None;
            e.t_release_done = Some(t0 + ms(rng.random_range(2.0..4.0)));
        }
        1 => {
            let slow = t0 + ms(rng.random_range(3.5..6.0));
            e.t_lift_5cm = Some(slow);
            e.t_release_done = Some(slow + hold + settle);
        }
        2 => {
            let short = ms(rng.random_range(0.5..2.5));
            e.hold_duration = Some(short);
            e.t_release_done = Some(lift + short + settle);
        }
        _ => e.slip_during_hold = true,
    }
    e
}

pub(crate) fn ycb_attempts(
    p_table: &BTreeMap<(String, u32), f64>,
    k: u32,
    a: u32,
    rng: &mut impl Rng,
) -> Result<(Vec<GraspAttempt>, YcbTruth), SynthError> {
    if k == 0 || a == 0 {
        return Err(SynthError::InvalidParameter("k and a must be at least 1".into()));
    }
    let objects: BTreeSet<&str> = p_table.keys().map(|(o, _)| o.as_str()).collect();
    if objects.is_empty() {
        return Err(SynthError::InvalidParameter("probability table is empty".into()));
    }
    let mut attempts = Vec::new();
    let mut per_object = Vec::new();
    let (mut total_g, mut total_n) = (0u64, 0u64);
    let mut t0 = 0.0;
    for object in &objects {
        let (mut g, mut p_sum) = (0u64, 0.0);
        for pose in 1..=k {
            let p = *p_table.get(&(object.to_string(), pose)).ok_or_else(|| {
                SynthError::InvalidParameter(format!("no probability for ({object}, pose {pose})"))
            })?;
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::InvalidParameter(format!("probability {p} outside [0, 1]")));
            }
            p_sum += p;
            for idx in 1..=a {
                let success = rng.random_bool(p);
                g += u64::from(success);
                attempts.push(GraspAttempt {
                    object_id: object.to_string(),
                    pose_index: pose,
                    attempt_index: idx,
                    events: attempt_events(t0, success, rng),
                    outcome_override: None,
                    trace_id: None,
                });
                t0 += 20.0;
            }
        }
        let n = u64::from(k) * u64::from(a);
        total_g += g;
        total_n += n;
        per_object.push(ObjectTruth {
            object_id: object.to_string(),
            p: p_sum / f64::from(k),
            rate: g as f64 / n as f64,
        });
    }
    let n_obj = per_object.len() as f64;
    let truth = YcbTruth {
        poses: k,
        attempts_per_pose: a,
        successes: total_g,
        attempts: total_n,
        micro: total_g as f64 / total_n as f64,
        macro_avg: per_object.iter().map(|o| o.rate).sum::<f64>() / n_obj,
        expected_macro: per_object.iter().map(|o| o.p).sum::<f64>() / n_obj,
        per_object,
    };
    Ok((attempts, truth))
}

/// Bernoulli outcomes for `k` poses and `a` attempts per (object, pose),
/// with timing events that satisfy or break the success rule accordingly.
pub fn gen_ycb(
    p_table: &BTreeMap<(String, u32), f64>,
    k: u32,
    a: u32,
    seed: u64,
) -> Result<(Session, GroundTruth), SynthError> {
    let mut rng = rng_from_seed(derive_seed(seed, 1));
    let (attempts, ycb) = ycb_attempts(p_table, k, a, &mut rng)?;
    let mut session = Session::new(Manifest::new("synthetic gripper", "synthetic platform"));
    session.attempts = attempts;
    let mut truth = GroundTruth::new("ycb", seed);
    truth.ycb = Some(ycb);
    Ok((session, truth))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferGroupSpec {
    pub group: ParticipantGroup,
    pub mean_s: f64,
    pub sd_s: f64,
    pub participants: usize,
    pub cycles_per_participant: usize,
}

impl TransferGroupSpec {
    pub fn new(group: ParticipantGroup, mean_s: f64, sd_s: f64, participants: usize) -> Self {
        Self {
            group,
            mean_s,
            sd_s,
            participants,
            cycles_per_participant: 1,
        }
    }
}

fn participant_id(group: &ParticipantGroup, i: usize) -> String {
    format!("{}-{:02}", group, i + 1)
}

fn transfer_truth(specs: &[TransferGroupSpec], cycles: &[TransferCycle], fault_rate: f64) -> TransferTruth {
    let groups = specs
        .iter()
        .map(|s| {
            let mine: Vec<&TransferCycle> = cycles.iter().filter(|c| c.group == s.group).collect();
            let ok: Vec<f64> = mine.iter().filter(|c| c.is_success()).map(|c| c.duration_s).collect();
            GroupTruth {
                group: s.group.clone(),
                mean_s: s.mean_s,
                sd_s: s.sd_s,
                n_cycles: mine.len(),
                n_faulted: mine.len() - ok.len(),
                generated_mean_s: (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64),
            }
        })
        .collect();
    let ok = cycles.iter().filter(|c| c.is_success()).count();
    TransferTruth {
        fault_rate,
        s_transfer: if cycles.is_empty() {
            1.0
        } else {
            ok as f64 / cycles.len() as f64
        },
        groups,
    }
}

/// Durations from a normal distribution truncated at zero, with each cycle
/// faulted independently at `fault_rate`.
pub fn gen_transfer(
    specs: &[TransferGroupSpec],
    fault_rate: f64,
    seed: u64,
) -> Result<(Vec<TransferCycle>, TransferTruth), SynthError> {
    if !(0.0..=1.0).contains(&fault_rate) {
        return Err(SynthError::InvalidParameter(format!("fault rate {fault_rate} outside [0, 1]")));
    }
    let mut rng = rng_from_seed(derive_seed(seed, 2));
    let faults = [
        TransferFault::MechanicalMisalignment,
        TransferFault::ElectricalConnector,
        TransferFault::SoftwareComm,
    ];
    let mut cycles = Vec::new();
    for s in specs {
        if !(s.mean_s > 0.0 && s.mean_s.is_finite()) || !(s.sd_s >= 0.0 && s.sd_s.is_finite()) {
            return Err(SynthError::InvalidParameter(format!(
                "group {}: mean must be > 0 and sd >= 0",
                s.group
            )));
        }
        let normal = Normal::new(s.mean_s, s.sd_s).expect("checked above");
        for p in 0..s.participants {
            for _ in 0..s.cycles_per_participant {
                let duration_s = if s.sd_s == 0.0 {
                    s.mean_s
                } else {
                    loop {
                        let d = normal.sample(&mut rng);
                        if d > 0.0 {
                            break d;
                        }
                    }
                };
                let mut set = BTreeSet::new();
                if rng.random_bool(fault_rate) {
                    set.insert(faults[rng.random_range(0..faults.len())]);
                }
                cycles.push(TransferCycle {
                    participant_id: participant_id(&s.group, p),
                    group: s.group.clone(),
                    duration_s,
                    faults: set,
                });
            }
        }
    }
    let truth = transfer_truth(specs, &cycles, fault_rate);
    Ok((cycles, truth))
}

/// `n` offsets in `[-spread, spread]` that come in `±d` pairs, plus a zero
/// when `n` is odd, in random order. Adding them to a center keeps both the
/// mean and the median at that center.
pub fn symmetric_offsets(n: usize, spread: f64, rng: &mut impl Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n / 2 {
        let d = spread * rng.random_range(0.1..=1.0);
        out.push(d);
        out.push(-d);
    }
    if n % 2 == 1 {
        out.push(0.0);
    }
    out.shuffle(rng);
    out
}

fn pick<T: Copy>(rng: &mut impl Rng, xs: &[T]) -> T {
    xs[rng.random_range(0..xs.len())]
}

fn centi(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn add_artifact(s: &mut Session, id: String, shape: ArtifactShape, rng: &mut impl Rng) -> String {
    let dim = centi(rng.random_range(20.0..120.0));
    let mass = centi(rng.random_range(50.0..900.0));
    s.artifacts.insert(id.clone(), ArtifactSpec::new(id.clone(), shape, dim, mass));
    id
}

/// A zero-noise session covering every metric family with random
/// parameters. Analysis of the bundle should recover the truth up to
/// integration error.
pub fn gen_oracle_bundle(seed: u64) -> Result<(Session, GroundTruth), SynthError> {
    let mut rng = rng_from_seed(derive_seed(seed, 3));
    let mut manifest = Manifest::new(format!("oracle gripper {seed}"), "synthetic platform");
    let low = centi(rng.random_range(10.0..60.0));
    manifest.gripper_profile = Some(GripperProfile {
        compliance: pick(&mut rng, &[Compliance::R, Compliance::S1, Compliance::S2, Compliance::F]),
        grip_type: pick(&mut rng, &[GripType::Wrap, GripType::Pinch]),
        ideal_shape: pick(&mut rng, &[IdealShape::Cylinder, IdealShape::Box, IdealShape::Sphere]),
        range_mm: [low, low + centi(rng.random_range(20.0..80.0))],
    });
    let mut s = Session::new(manifest);
    let mut truth = GroundTruth::new("oracle", seed);
    truth.profile_code = s.manifest.gripper_profile.map(|p| p.code());

    let mut p_table = BTreeMap::new();
    let k = rng.random_range(1..=3);
    let a = rng.random_range(1..=5);
    for o in 0..rng.random_range(2..=5) {
        for pose in 1..=k {
            p_table.insert((format!("obj{o}"), pose), rng.random_range(0.0..=1.0));
        }
    }
    let (attempts, ycb) = ycb_attempts(&p_table, k, a, &mut rng)?;
    s.attempts = attempts;
    truth.ycb = Some(ycb);

    let mut cyls = Vec::new();
    let mut boxes = Vec::new();
    for i in 0..2 {
        cyls.push(add_artifact(&mut s, format!("cyl{i}"), ArtifactShape::Cylinder, &mut rng));
    }
    for i in 0..3 {
        boxes.push(add_artifact(&mut s, format!("box{i}"), ArtifactShape::Box, &mut rng));
    }
    let grip = Some(GripType::Pinch);

    let mut t = 0.0;
    for id in &cyls {
        let mut values = Vec::new();
        for _ in 0..rng.random_range(1..=6) {
            let start = t + ms(rng.random_range(0.0..1.0));
            let stop = start + ms(rng.random_range(1.0..6.0));
            values.push(stop - start);
            s.trials.push(Trial::CycleTime {
                artifact: id.clone(),
                t_start_s: start,
                t_stop_s: stop,
                grasp_type: grip,
            });
            t += 10.0;
        }
        truth.cycle_time.push(ArtifactTruth::new(id, values));
    }

    for (ai, id) in cyls.iter().enumerate() {
        let mut values = Vec::new();
        for trial in 0..rng.random_range(1..=5) {
            let mut ids = Vec::new();
            let mut total = 0.0;
            for f in 0..rng.random_range(1..=3) {
                let force = centi(rng.random_range(0.5..8.0));
                let trace = gen_finger_force(force, rng.random_range(1.0..1.3), 100.0)?;
                total += force;
                let tid = format!("gs{ai}_{trial}_f{f}");
                s.traces.insert(tid.clone(), trace);
                ids.push(tid);
            }
            values.push(total);
            s.trials.push(Trial::GraspStrength {
                artifact: id.clone(),
                finger_traces: ids,
                grasp_type: grip,
            });
        }
        truth.grasp_strength.push(ArtifactTruth::new(id, values));
    }

    for (ai, id) in cyls.iter().enumerate() {
        let mut values = Vec::new();
        for trial in 0..rng.random_range(1..=5) {
            let mut p = SlipParams::new(centi(rng.random_range(1.0..15.0)));
            p.ramp_rate = rng.random_range(1.0..10.0);
            p.post_drop_level = rng.random_range(0.2..0.6);
            let tid = format!("slip{ai}_{trial}");
            s.traces.insert(tid.clone(), gen_slip(&p, &mut rng)?);
            values.push(p.f_true);
            s.trials.push(Trial::Slip {
                artifact: id.clone(),
                trace: tid,
                normal_force_n: Some(centi(rng.random_range(5.0..20.0))),
                applied_torque_nm: None,
                grasp_type: grip,
            });
        }
        truth.slip.push(ArtifactTruth::new(id, values));
    }

    for (ai, id) in boxes.iter().enumerate() {
        let mut values = Vec::new();
        let mut safety = 0;
        for trial in 0..rng.random_range(1..=5) {
            let mut p = SlipParams::new(centi(rng.random_range(2.0..20.0)));
            p.kind = TraceKind::Pull;
            p.ramp_rate = rng.random_range(1.0..10.0);
            p.post_drop_level = if rng.random_bool(0.3) {
                safety += 1;
                1.0
            } else {
                rng.random_range(0.2..0.6)
            };
            let tid = format!("pull{ai}_{trial}");
            s.traces.insert(tid.clone(), gen_slip(&p, &mut rng)?);
            values.push(p.f_true);
            s.trials.push(Trial::Payload {
                artifact: id.clone(),
                trace: tid,
            });
        }
        let mut row = ArtifactTruth::new(id, values);
        row.safety_limit_trials = safety;
        truth.payload.push(row);
    }

    let mut energies = Vec::new();
    let mut masses = Vec::new();
    for trial in 0..rng.random_range(1..=5) {
        let ph = centi(rng.random_range(0.05..0.5));
        let mut p = EnergyParams::new(
            [
                ph + centi(rng.random_range(0.5..2.0)),
                ph,
                ph + centi(rng.random_range(0.3..1.5)),
            ],
            [
                centi(rng.random_range(0.5..3.0)),
                centi(rng.random_range(2.0..12.0)),
                centi(rng.random_range(0.5..3.0)),
            ],
        );
        p.voltage_current = rng.random_bool(0.5);
        let (mut trace, e) = gen_energy(&p, &mut rng)?;
        if rng.random_bool(0.5) {
            trace = trace.with_phase_marks(None);
        }
        let tid = format!("power{trial}");
        s.traces.insert(tid.clone(), trace);
        let mass = centi(rng.random_range(50.0..1000.0));
        s.trials.push(Trial::Energy {
            trace: tid,
            object_mass_g: mass,
            t_hold_nominal_s: None,
        });
        energies.push(e);
        masses.push(mass);
    }
    truth.energy = Some(EnergyTruth::new(energies, masses));

    let groups = [
        ParticipantGroup::Bachelor,
        ParticipantGroup::Master,
        ParticipantGroup::UntrainedColleague,
        ParticipantGroup::Experienced,
    ];
    let mut specs = Vec::new();
    for g in groups {
        if rng.random_bool(0.75) {
            let mean = centi(rng.random_range(8.0..30.0));
            specs.push(TransferGroupSpec::new(g, mean, 0.0, rng.random_range(1..=6)));
        }
    }
    if !specs.is_empty() {
        let (cycles, tt) = gen_transfer(&specs, 0.0, derive_seed(seed, 4))?;
        s.transfer_cycles = cycles;
        truth.transfer = Some(tt);
    }
    Ok((s, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_session;

    fn table(ps: &[(&str, f64)], k: u32) -> BTreeMap<(String, u32), f64> {
        let mut t = BTreeMap::new();
        for (o, p) in ps {
            for pose in 1..=k {
                t.insert((o.to_string(), pose), *p);
            }
        }
        t
    }

    #[test]
    fn certain_success_and_failure() {
        let (s, truth) = gen_ycb(&table(&[("a", 1.0), ("b", 1.0)], 2), 2, 3, 1).unwrap();
        assert_eq!(s.attempts.len(), 12);
        let y = truth.ycb.unwrap();
        assert_eq!((y.micro, y.macro_avg), (1.0, 1.0));
        let (_, truth) = gen_ycb(&table(&[("a", 0.0)], 1), 1, 4, 1).unwrap();
        assert_eq!(truth.ycb.unwrap().successes, 0);
    }

    #[test]
    fn generated_events_classify_as_intended() {
        let (s, truth) = gen_ycb(&table(&[("a", 0.5), ("b", 0.3), ("c", 0.9)], 3), 3, 5, 9).unwrap();
        assert!(validate_session(&s).is_empty());
        let wins = s
            .attempts
            .iter()
            .filter(|a| crate::metrics::classify_attempt(a).unwrap().outcome.is_success())
            .count();
        assert_eq!(wins as u64, truth.ycb.unwrap().successes);
    }

    #[test]
    fn missing_pose_probability_is_an_error() {
        let t = table(&[("a", 0.5)], 1);
        assert!(gen_ycb(&t, 2, 1, 0).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        assert_eq!(gen_oracle_bundle(5).unwrap(), gen_oracle_bundle(5).unwrap());
        assert_ne!(gen_oracle_bundle(5).unwrap().0, gen_oracle_bundle(6).unwrap().0);
    }

    #[test]
    fn transfer_without_dispersion_hits_means() {
        let specs = [
            TransferGroupSpec::new(ParticipantGroup::Bachelor, 16.1, 0.0, 4),
            TransferGroupSpec::new(ParticipantGroup::Experienced, 17.6, 0.0, 3),
        ];
        let (cycles, truth) = gen_transfer(&specs, 0.0, 1).unwrap();
        assert_eq!(cycles.len(), 7);
        assert!(cycles.iter().all(|c| c.is_success()));
        assert_eq!(truth.s_transfer, 1.0);
        assert_eq!(truth.groups[0].generated_mean_s, Some(16.1));
    }

    #[test]
    fn truncated_normal_stays_positive() {
        let specs = [TransferGroupSpec::new(ParticipantGroup::Master, 1.0, 5.0, 500)];
        let (cycles, truth) = gen_transfer(&specs, 0.3, 2).unwrap();
        assert!(cycles.iter().all(|c| c.duration_s > 0.0));
        let faulted = truth.groups[0].n_faulted as f64 / 500.0;
        assert!((faulted - 0.3).abs() < 0.07);
    }

    #[test]
    fn symmetric_offsets_cancel() {
        let mut rng = rng_from_seed(3);
        for n in 1..12 {
            let o = symmetric_offsets(n, 0.5, &mut rng);
            assert_eq!(o.len(), n);
            assert!(o.iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_bundle_is_valid() {
        for seed in 0..20 {
            let (s, truth) = gen_oracle_bundle(seed).unwrap();
            assert_eq!(validate_session(&s), vec![], "seed {seed}");
            assert_eq!(truth.validate(), Vec::<String>::new());
        }
    }
}
