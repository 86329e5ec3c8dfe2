use std::collections::BTreeMap;

use super::sessions::{gen_transfer, symmetric_offsets, ycb_attempts, TransferGroupSpec};
use super::traces::{gen_energy, gen_finger_force, gen_slip, EnergyParams, SlipParams};
use super::{ArtifactTruth, EnergyTruth, GroundTruth, SynthError};
use crate::model::{
    ArtifactShape, ArtifactSpec, Compliance, GripType, GripperProfile, IdealShape, Manifest, ParticipantGroup,
    Session, TraceKind, Trial,
};
use crate::stats::{derive_seed, rng_from_seed};

/// Target point values of the reference fixture.
#[derive(Debug, Clone)]
pub struct ReplicaTargets {
    /// (cylinder diameter mm, cycle time s), 32 trials each.
    pub cycle_time: [(f64, f64); 2],
    /// (cylinder diameter mm, total grasp force N).
    pub grasp_strength: [(f64, f64); 2],
    /// (cylinder diameter mm, slip force N).
    pub slip: [(f64, f64); 4],
    /// Grasp, 10 s hold and release energy, J.
    pub energy: [f64; 3],
    pub energy_durations: [f64; 3],
    pub object_mass_g: f64,
    /// (box gripping distance mm, ideal payload N, ends at safety stop).
    pub payload: [(f64, f64, bool); 3],
    /// (group, mean transfer time s, participants).
    pub transfer: [(ParticipantGroup, f64, usize); 4],
    pub transfer_cycles_per_participant: usize,
    pub normal_force_50mm: f64,
}

pub const REPLICA_TARGETS: ReplicaTargets = ReplicaTargets {
    cycle_time: [(50.0, 3.91), (80.0, 3.23)],
    grasp_strength: [(50.0, 9.79), (80.0, 8.18)],
    slip: [(32.0, 6.28), (50.0, 5.78), (75.0, 6.24), (100.0, 3.75)],
    energy: [2.59, 1.5, 1.91],
    energy_durations: [2.0, 10.0, 2.0],
    object_mass_g: 600.0,
    payload: [(50.0, 11.37, false), (75.0, 11.99, false), (100.0, 7.67, true)],
    transfer: [
        (ParticipantGroup::Bachelor, 16.1, 12),
        (ParticipantGroup::Master, 14.2, 11),
        (ParticipantGroup::UntrainedColleague, 22.8, 11),
        (ParticipantGroup::Experienced, 17.6, 11),
    ],
    transfer_cycles_per_participant: 5,
    normal_force_50mm: 9.79,
};

const CYCLE_TRIALS: usize = 32;
const TRIALS: usize = 10;
const RATE_HZ: f64 = 100.0;

fn cyl(d: f64) -> String {
    format!("cyl{d}")
}

fn boxed(d: f64) -> String {
    format!("box{d}")
}

/// Reference fixture covering every family. Per-trial values are spread
/// symmetrically around the targets, so medians and means hit them.
pub fn gen_replica(seed: u64) -> Result<(Session, GroundTruth), SynthError> {
    let tg = &REPLICA_TARGETS;
    let mut rng = rng_from_seed(derive_seed(seed, 10));
    let mut manifest = Manifest::new("Reference gripper prototype", "Industrial manipulator");
    manifest.gripper_profile = Some(GripperProfile {
        compliance: Compliance::S2,
        grip_type: GripType::Pinch,
        ideal_shape: IdealShape::Box,
        range_mm: [40.0, 100.0],
    });
    manifest.operator_notes = Some(format!("reference fixture, seed {seed}"));
    let mut s = Session::new(manifest);
    let mut truth = GroundTruth::new("replica", seed);
    truth.profile_code = s.manifest.gripper_profile.map(|p| p.code());

    for d in [32.0, 50.0, 75.0, 80.0, 100.0] {
        let id = cyl(d);
        let mass = 0.2 * d * d;
        s.artifacts.insert(id.clone(), ArtifactSpec::new(id, ArtifactShape::Cylinder, d, mass));
    }
    for (d, _, _) in tg.payload {
        let id = boxed(d);
        s.artifacts.insert(id.clone(), ArtifactSpec::new(id, ArtifactShape::Box, d, 150.0));
    }
    let pinch = Some(GripType::Pinch);

    let mut t = 0.0;
    for (d, target) in tg.cycle_time {
        let mut values = Vec::new();
        for off in symmetric_offsets(CYCLE_TRIALS, 0.03, &mut rng) {
            let dur = target + off;
            s.trials.push(Trial::CycleTime {
                artifact: cyl(d),
                t_start_s: t,
                t_stop_s: t + dur,
                grasp_type: pinch,
            });
            values.push(t + dur - t);
            t += 10.0;
        }
        truth.cycle_time.push(ArtifactTruth::new(&cyl(d), values));
    }

    for (d, target) in tg.grasp_strength {
        let mut values = Vec::new();
        for (i, off) in symmetric_offsets(TRIALS, 0.03, &mut rng).into_iter().enumerate() {
            let per_finger = (target + off) / 2.0;
            let mut ids = Vec::new();
            for f in 0..2 {
                let tid = format!("force_{}_{i}_f{f}", cyl(d));
                s.traces.insert(tid.clone(), gen_finger_force(per_finger, 1.08, RATE_HZ)?);
                ids.push(tid);
            }
            values.push(per_finger + per_finger);
            s.trials.push(Trial::GraspStrength {
                artifact: cyl(d),
                finger_traces: ids,
                grasp_type: pinch,
            });
        }
        truth.grasp_strength.push(ArtifactTruth::new(&cyl(d), values));
    }

    for (d, target) in tg.slip {
        let mut values = Vec::new();
        for (i, off) in symmetric_offsets(TRIALS, 0.1, &mut rng).into_iter().enumerate() {
            let mut p = SlipParams::new(target + off);
            p.ramp_rate = 2.5;
            p.post_drop_level = 0.35;
            let tid = format!("slip_{}_{i}", cyl(d));
            s.traces.insert(tid.clone(), gen_slip(&p, &mut rng)?);
            values.push(p.f_true);
            s.trials.push(Trial::Slip {
                artifact: cyl(d),
                trace: tid,
                normal_force_n: (d == 50.0).then_some(tg.normal_force_50mm),
                applied_torque_nm: None,
                grasp_type: pinch,
            });
        }
        truth.slip.push(ArtifactTruth::new(&cyl(d), values));
    }

    let [dg, dh, dr] = tg.energy_durations;
    let base = [tg.energy[0] / dg, tg.energy[1] / dh, tg.energy[2] / dr];
    let offsets: Vec<Vec<f64>> = (0..3)
        .map(|k| symmetric_offsets(TRIALS, 0.01 * base[k], &mut rng))
        .collect();
    let mut energies = Vec::new();
    for i in 0..TRIALS {
        let powers = [0, 1, 2].map(|k| base[k] + offsets[k][i]);
        let mut p = EnergyParams::new(powers, tg.energy_durations);
        p.rate = RATE_HZ;
        p.voltage_current = true;
        let (trace, e) = gen_energy(&p, &mut rng)?;
        let tid = format!("power_{i}");
        s.traces.insert(tid.clone(), trace);
        s.trials.push(Trial::Energy {
            trace: tid,
            object_mass_g: tg.object_mass_g,
            t_hold_nominal_s: None,
        });
        energies.push(e);
    }
    truth.energy = Some(EnergyTruth::new(energies, vec![tg.object_mass_g; TRIALS]));

    for (d, target, safety) in tg.payload {
        let mut values = Vec::new();
        for (i, off) in symmetric_offsets(TRIALS, 0.3, &mut rng).into_iter().enumerate() {
            let mut p = SlipParams::new(target + off);
            p.kind = TraceKind::Pull;
            p.ramp_rate = 2.5;
            p.post_drop_level = if safety { 1.0 } else { 0.3 };
            let tid = format!("pull_{}_{i}", boxed(d));
            s.traces.insert(tid.clone(), gen_slip(&p, &mut rng)?);
            values.push(p.f_true);
            s.trials.push(Trial::Payload {
                artifact: boxed(d),
                trace: tid,
            });
        }
        let mut row = ArtifactTruth::new(&boxed(d), values);
        row.safety_limit_trials = if safety { TRIALS } else { 0 };
        truth.payload.push(row);
    }

    let specs: Vec<TransferGroupSpec> = tg
        .transfer
        .iter()
        .map(|(g, mean, n)| TransferGroupSpec {
            group: g.clone(),
            mean_s: *mean,
            sd_s: 0.0,
            participants: *n,
            cycles_per_participant: tg.transfer_cycles_per_participant,
        })
        .collect();
    let (mut cycles, mut tt) = gen_transfer(&specs, 0.0, derive_seed(seed, 11))?;
    for (spec, gt) in specs.iter().zip(&mut tt.groups) {
        let mine: Vec<usize> = (0..cycles.len()).filter(|&i| cycles[i].group == spec.group).collect();
        let offsets = symmetric_offsets(mine.len(), 0.25 * spec.mean_s, &mut rng);
        for (&i, off) in mine.iter().zip(offsets) {
            cycles[i].duration_s = spec.mean_s + off;
        }
        let ok: Vec<f64> = mine.iter().map(|&i| cycles[i].duration_s).collect();
        let mean = ok.iter().sum::<f64>() / ok.len() as f64;
        gt.generated_mean_s = Some(mean);
        gt.sd_s = (ok.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / ok.len() as f64).sqrt();
    }
    s.transfer_cycles = cycles;
    truth.transfer = Some(tt);

    let mut p_table = BTreeMap::new();
    for (object, p) in [
        ("apple", 0.8),
        ("tennis_ball", 0.9),
        ("mustard_bottle", 0.7),
        ("power_drill", 0.3),
        ("large_clamp", 0.85),
        ("plate", 0.0),
        ("spatula", 0.05),
    ] {
        for pose in 1..=2 {
            p_table.insert((object.to_string(), pose), p);
        }
    }
    let (attempts, ycb) = ycb_attempts(&p_table, 2, 5, &mut rng)?;
    s.attempts = attempts;
    truth.ycb = Some(ycb);

    Ok((s, truth))
}
