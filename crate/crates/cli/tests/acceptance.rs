//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;

use cegb::ingest::{load_session, write_session};
use cegb::metrics::{classify_attempt, energy_metrics, ycb_aggregate, EnergyTrialInput, Reason};
use cegb::model::{AttemptEvents, GraspAttempt, Outcome, SampledTrace, Session, TraceKind};
use cegb::report::{analyze, AnalysisConfig, Report};
use cegb::signal::{detect_slip_onset, integrate_power, PhaseInferenceConfig, SlipDetectorConfig};
use cegb::stats::{derive_seed, rng_from_seed, wilson_interval, BootstrapConfig};
use cegb::synth::{gen_energy, gen_oracle_bundle, gen_slip, read_ground_truth, write_bundle, EnergyParams, SlipParams};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn within(got: f64, want: f64, rel: f64, what: &str) -> Result<(), String> {
    ensure(rel_err(got, want) <= rel, || {
        format!("{what}: got {got}, want {want} within {:.2}%", rel * 100.0)
    })
}

fn cegb(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cegb"))
        .args(args)
        .env_remove("CEGB_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("cegb {args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn replica_report(tmp: &Path) -> Result<(Report, Duration), String> {
    let dir = tmp.join("replica");
    let start = Instant::now();
    cegb(&["simulate", "--replica", dir.to_str().unwrap()])?;
    let json = cegb(&["analyze", dir.to_str().unwrap()])?;
    let elapsed = start.elapsed();
    let report = Report::from_json(&String::from_utf8(json).unwrap()).map_err(|e| e.to_string())?;
    Ok((report, elapsed))
}

fn c1_replica(tmp: &Path) -> Check {
    let (r, elapsed) = replica_report(tmp)?;
    let tol = 0.01;
    let nist = r.nist.as_ref().ok_or("no NIST family")?;
    let by_dim = |rows: Vec<(f64, f64)>, want: &[(f64, f64)], what: &str| -> Result<(), String> {
        ensure(rows.len() == want.len(), || format!("{what}: {} rows", rows.len()))?;
        for ((d, got), (wd, w)) in rows.iter().zip(want) {
            ensure(d == wd, || format!("{what}: row for {d} mm, expected {wd} mm"))?;
            within(*got, *w, tol, &format!("{what} {d} mm"))?;
        }
        Ok(())
    };
    by_dim(
        nist.cycle_time.iter().map(|c| (c.artifact.dimension_mm, c.cycle_time.median)).collect(),
        &[(50.0, 3.91), (80.0, 3.23)],
        "cycle time",
    )?;
    by_dim(
        nist.grasp_strength
            .iter()
            .map(|c| (c.artifact.dimension_mm, c.strength.f_total.median))
            .collect(),
        &[(50.0, 9.79), (80.0, 8.18)],
        "grasp strength",
    )?;
    by_dim(
        nist.slip.iter().map(|c| (c.artifact.dimension_mm, c.f_slip.median)).collect(),
        &[(32.0, 6.28), (50.0, 5.78), (75.0, 6.24), (100.0, 3.75)],
        "slip",
    )?;
    let e = r.energy.as_ref().ok_or("no energy family")?;
    within(e.e_grasp.median, 2.59, tol, "E_grasp")?;
    within(e.e_hold10, 1.5, tol, "E_hold10")?;
    within(e.e_release.median, 1.91, tol, "E_release")?;
    within(e.e_cycle.median, 6.0, tol, "E_cycle")?;
    let p = r.iipb.as_ref().ok_or("no payload family")?;
    ensure(p.profile_code == "2S-P-B", || format!("profile code {}", p.profile_code))?;
    by_dim(
        p.per_artifact.iter().map(|a| (a.dimension_mm, a.f_ideal.median)).collect(),
        &[(50.0, 11.37), (75.0, 11.99), (100.0, 7.67)],
        "payload",
    )?;
    let t = r.transfer.as_ref().ok_or("no transfer family")?;
    ensure(t.overall.success.point == 1.0, || format!("S_transfer {}", t.overall.success.point))?;
    for (g, want) in t.per_group.iter().zip([16.1, 14.2, 22.8, 17.6]) {
        within(g.stats.mean_s.ok_or("group without mean")?, want, tol, &format!("transfer {}", g.group))?;
    }
    ensure(elapsed < Duration::from_secs(10), || format!("simulate + analyze took {elapsed:?}"))?;
    Ok(format!("all replica point values within 1%, simulate + analyze {:.2} s", elapsed.as_secs_f64()))
}

fn c2_energy_to_weight(tmp: &Path) -> Check {
    let direct = 2.59 / 600.0;
    within(direct, 4.31e-3, 0.005, "2.59 J / 600 g")?;
    let (r, _) = replica_report(tmp)?;
    let e = r.energy.ok_or("no energy family")?;
    within(e.energy_to_weight_grasp, direct, 0.01, "replica grasp ratio")?;
    within(e.energy_to_weight_grasp, 4.31e-3, 0.005, "replica grasp ratio vs 4.31e-3")?;
    within(e.energy_to_weight_cycle, 0.01, 0.01, "full-cycle ratio")?;
    Ok(format!(
        "grasp {:.4e} J/g ({:.2}% from 4.31e-3), cycle {:.4e} J/g",
        e.energy_to_weight_grasp,
        100.0 * rel_err(e.energy_to_weight_grasp, 4.31e-3),
        e.energy_to_weight_cycle
    ))
}

fn c3_e_hold10() -> Check {
    let mut worst: f64 = 0.0;
    let mut rng = rng_from_seed(3);
    for hold in [10.0, 7.3, 3.0, 12.57] {
        let (trace, _) = gen_energy(&EnergyParams::new([1.2, 0.15, 0.9], [2.0, hold, 1.5]), &mut rng)
            .map_err(|e| e.to_string())?;
        let input = EnergyTrialInput {
            trace: &trace,
            marks: trace.phase_marks(),
            mass_g: 100.0,
        };
        let e = energy_metrics(&[input], None, &PhaseInferenceConfig::default(), &BootstrapConfig::new(200, 1))
            .map_err(|e| e.to_string())?;
        let err = (e.e_hold10 - 1.5).abs();
        worst = worst.max(err);
        ensure(err <= 4.0 * f64::EPSILON * 1.5, || {
            format!("hold {hold} s: E_hold10 = {:.17} (error {err:e})", e.e_hold10)
        })?;
    }
    Ok(format!("E_hold10 = 1.5 J, worst error {worst:e} over four hold durations"))
}

fn c4_integration() -> Check {
    let times: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
    let values: Vec<f64> = times.iter().map(|t| (2.0 * std::f64::consts::PI * t).sin().powi(2)).collect();
    let trace = SampledTrace::scalar(TraceKind::Power, times, values).map_err(|e| e.to_string())?;
    let full = integrate_power(&trace, 0.0, 1.0).map_err(|e| e.to_string())?;
    within(full, 0.5, 1e-3, "sin^2 integral")?;
    let mut rng = rng_from_seed(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a = rng.random_range(0.0..0.5);
        let b = rng.random_range(0.5..1.0);
        let m = rng.random_range(a..b);
        if !(a < m && m < b) {
            continue;
        }
        let whole = integrate_power(&trace, a, b).map_err(|e| e.to_string())?;
        let parts = integrate_power(&trace, a, m).map_err(|e| e.to_string())?
            + integrate_power(&trace, m, b).map_err(|e| e.to_string())?;
        let rel = (whole - parts).abs() / whole.abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-9, || format!("additivity over [{a}, {m}, {b}]: relative error {rel:e}"))?;
    }
    Ok(format!(
        "integral {full:.6} J ({:.4}% error), worst additivity error {worst:e}",
        100.0 * rel_err(full, 0.5)
    ))
}

fn naive_success(e: &AttemptEvents, over: Option<Outcome>) -> bool {
    let any = e.t_lift_5cm.is_some() || e.hold_duration.is_some() || e.t_release_done.is_some() || e.slip_during_hold;
    if !any {
        return over == Some(Outcome::Success);
    }
    let Some(lift) = e.t_lift_5cm else { return false };
    let deadline = e.t_grasp_cmd + 10.0;
    lift - e.t_grasp_cmd <= 3.0
        && e.hold_duration.is_some_and(|h| h >= 3.0)
        && !e.slip_during_hold
        && lift <= deadline
        && e.t_release_done.is_none_or(|t| t <= deadline)
}

fn random_attempts(rng: &mut impl Rng) -> Vec<GraspAttempt> {
    let mut out = Vec::new();
    for o in 0..rng.random_range(1..=4) {
        let poses = rng.random_range(1..=3);
        let a = rng.random_range(1..=4);
        for pose in 1..=poses {
            for attempt in 1..=a {
                let t0 = (rng.random_range(0..1000) * 20) as f64;
                let mut events = AttemptEvents {
                    t_grasp_cmd: t0,
                    ..AttemptEvents::default()
                };
                let mut over = None;
                match rng.random_range(0..10) {
                    0 => over = Some(if rng.random_bool(0.5) { Outcome::Success } else { Outcome::Failure }),
                    1 => {}
                    _ => {
                        let lift = t0 + [rng.random_range(0.2..4.0), 3.0][rng.random_range(0..2)];
                        let hold = [rng.random_range(0.5..6.0), 3.0][rng.random_range(0..2)];
                        events.t_lift_5cm = Some(lift);
                        events.hold_duration = Some(hold);
                        events.slip_during_hold = rng.random_bool(0.2);
                        if rng.random_bool(0.9) {
                            events.t_release_done = Some(lift + hold + rng.random_range(0.1..3.0));
                        }
                    }
                }
                out.push(GraspAttempt {
                    object_id: format!("o{o}"),
                    pose_index: pose,
                    attempt_index: attempt,
                    events,
                    outcome_override: over,
                    trace_id: None,
                });
            }
        }
    }
    out
}

fn oracle_family_check(report: &Report, session: &Session, truth: &cegb::synth::GroundTruth) -> Result<(), String> {
    let tol = 1e-3;
    let y = report.ycb.as_ref().ok_or("ycb missing")?;
    let yt = truth.ycb.as_ref().ok_or("ycb truth missing")?;
    ensure(y.micro.point == yt.micro && y.macro_avg.point == yt.macro_avg, || "ycb micro/macro".into())?;
    let n = report.nist.as_ref().ok_or("nist missing")?;
    let rows = |family: &str, got: Vec<(&str, f64)>, want: &[cegb::synth::ArtifactTruth]| -> Result<(), String> {
        for t in want {
            let (_, v) = got
                .iter()
                .find(|(id, _)| *id == t.artifact_id)
                .ok_or_else(|| format!("{family}: no row for {}", t.artifact_id))?;
            within(*v, t.median, tol, &format!("{family} {}", t.artifact_id))?;
        }
        Ok(())
    };
    rows(
        "cycle time",
        n.cycle_time.iter().map(|r| (r.artifact.artifact_id.as_str(), r.cycle_time.median)).collect(),
        &truth.cycle_time,
    )?;
    rows(
        "grasp strength",
        n.grasp_strength
            .iter()
            .map(|r| (r.artifact.artifact_id.as_str(), r.strength.f_total.median))
            .collect(),
        &truth.grasp_strength,
    )?;
    rows(
        "slip",
        n.slip.iter().map(|r| (r.artifact.artifact_id.as_str(), r.f_slip.median)).collect(),
        &truth.slip,
    )?;
    let p = report.iipb.as_ref().ok_or("payload missing")?;
    for t in &truth.payload {
        let dim = session.artifacts[&t.artifact_id].characteristic_dimension_mm;
        let row = p
            .per_artifact
            .iter()
            .find(|a| a.dimension_mm == dim)
            .ok_or("payload row missing")?;
        within(row.f_ideal.median, t.median, tol, &format!("payload {}", t.artifact_id))?;
    }
    let e = report.energy.as_ref().ok_or("energy missing")?;
    let et = truth.energy.as_ref().ok_or("energy truth missing")?;
    for (got, want, what) in [
        (e.e_grasp.median, et.e_grasp, "E_grasp"),
        (e.e_hold.median, et.e_hold, "E_hold"),
        (e.e_release.median, et.e_release, "E_release"),
        (e.e_cycle.median, et.e_cycle, "E_cycle"),
        (e.e_hold10, et.e_hold10, "E_hold10"),
    ] {
        within(got, want, tol, what)?;
    }
    if let (Some(t), Some(tt)) = (&report.transfer, &truth.transfer) {
        ensure(t.overall.success.point == tt.s_transfer, || "S_transfer".into())?;
        for g in &tt.groups {
            let row = t.per_group.iter().find(|r| r.group == g.group).ok_or("transfer group missing")?;
            within(row.stats.mean_s.ok_or("no mean")?, g.mean_s, tol, "transfer mean")?;
        }
    } else {
        ensure(report.transfer.is_none() && truth.transfer.is_none(), || "transfer presence".into())?;
    }
    Ok(())
}

fn c5_oracles(tmp: &Path) -> Check {
    let mut rng = rng_from_seed(5);
    let cfg = BootstrapConfig::new(100, 5);
    for set in 0..1000 {
        let attempts = random_attempts(&mut rng);
        let mut per_object: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
        let (mut g, mut n) = (0u64, 0u64);
        for a in &attempts {
            let ok = naive_success(&a.events, a.outcome_override);
            let verdict = classify_attempt(a).map_err(|e| e.to_string())?;
            ensure(verdict.outcome.is_success() == ok, || format!("set {set}: verdict differs for {a:?}"))?;
            let entry = per_object.entry(&a.object_id).or_default();
            entry.0 += u64::from(ok);
            entry.1 += 1;
            g += u64::from(ok);
            n += 1;
        }
        let micro = g as f64 / n as f64;
        let rates: Vec<f64> = per_object.values().map(|(s, t)| *s as f64 / *t as f64).collect();
        let macro_avg = rates.iter().sum::<f64>() / rates.len() as f64;
        let r = ycb_aggregate(&attempts, &cfg).map_err(|e| format!("set {set}: {e}"))?;
        ensure(r.micro.point == micro && r.micro.successes == g && r.micro.trials == n, || {
            format!("set {set}: micro {} vs oracle {micro}", r.micro.point)
        })?;
        ensure(r.macro_avg.point == macro_avg, || {
            format!("set {set}: macro {} vs oracle {macro_avg}", r.macro_avg.point)
        })?;
    }
    let cfg = AnalysisConfig::new(11, 200);
    for seed in 0..100 {
        let dir = tmp.join(format!("oracle{seed}"));
        let (session, truth) = gen_oracle_bundle(seed).map_err(|e| e.to_string())?;
        write_bundle(&session, &truth, &dir).map_err(|e| e.to_string())?;
        let loaded = load_session(&dir).map_err(|e| e.to_string())?;
        let truth = read_ground_truth(&dir).map_err(|e| e.to_string())?;
        let report = analyze(&loaded, &cfg).map_err(|e| format!("seed {seed}: {e}"))?;
        oracle_family_check(&report, &loaded, &truth).map_err(|e| format!("oracle bundle {seed}: {e}"))?;
    }
    Ok("1000 random YCB sets match the counting oracle exactly; 100 oracle bundles within 0.1%".into())
}

fn c6_wilson() -> Check {
    let start = Instant::now();
    let reps = 10_000;
    let mut rng = rng_from_seed(6);
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    for n in [5u64, 10, 50] {
        let intervals: Vec<(f64, f64)> = (0..=n)
            .map(|g| wilson_interval(g, n, 0.95).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        for (g, (lo, hi)) in intervals.iter().enumerate() {
            let point = g as f64 / n as f64;
            ensure(*lo <= point && point <= *hi, || format!("interval for {g}/{n} misses its point"))?;
        }
        for k in 1..=9 {
            let p = k as f64 / 10.0;
            let mut covered = 0;
            for _ in 0..reps {
                let g = (0..n).filter(|_| rng.random_bool(p)).count();
                let (lo, hi) = intervals[g];
                covered += usize::from(lo <= p && p <= hi);
            }
            let coverage = covered as f64 / reps as f64;
            cells.push(coverage);
            if coverage < 0.93 {
                failures.push(format!("n={n} p={p:.1}: {coverage:.4}"));
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    let min = cells.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(failures.is_empty(), || {
        format!("coverage below 0.93 in {} cell(s): {}", failures.len(), failures.join(", "))
    })?;
    Ok(format!("minimum coverage {min:.4} over 27 cells in {:.1} s", elapsed.as_secs_f64()))
}

fn c7_slip() -> Check {
    let cfg = SlipDetectorConfig::default();
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let mut p = SlipParams::new(6.0);
        p.noise_sd = 0.05;
        let mut rng = rng_from_seed(derive_seed(7, seed));
        let trace = gen_slip(&p, &mut rng).map_err(|e| e.to_string())?;
        let onset = detect_slip_onset(&trace, &cfg).map_err(|e| e.to_string())?;
        let err = rel_err(onset.f_slip, 6.0);
        worst = worst.max(err);
        ensure(err <= 0.02 && onset.slipped, || format!("seed {seed}: F_slip {}", onset.f_slip))?;
    }

    // Ramp to 8 N, short dips well below the drop threshold, on to 9 N, then a sustained drop.
    let rate = 100.0;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for k in 0..=600 {
        let t = k as f64 / rate;
        let mut v = if t <= 4.0 { 2.0 * t } else if t <= 4.5 { 8.0 + 2.0 * (t - 4.0) } else { 2.0 };
        for dip in [2.0, 3.0, 4.2] {
            if (t - dip).abs() < 0.025 {
                v *= 0.5;
            }
        }
        times.push(t);
        values.push(v);
    }
    let trace = SampledTrace::scalar(TraceKind::Tangential, times, values).map_err(|e| e.to_string())?;
    let mut no_smoothing = cfg;
    no_smoothing.smoothing_window = 0.01;
    for c in [cfg, no_smoothing] {
        let onset = detect_slip_onset(&trace, &c).map_err(|e| e.to_string())?;
        ensure((onset.f_slip - 9.0).abs() < 0.05 && onset.t_slip > 4.4, || {
            format!("transient dips triggered onset: F_slip {} at {} s", onset.f_slip, onset.t_slip)
        })?;
    }
    Ok(format!("worst F_slip error {:.3}% over 100 seeds; transient dips ignored", worst * 100.0))
}

fn c8_determinism(tmp: &Path) -> Check {
    let dir = tmp.join("det");
    cegb(&["simulate", "--replica", dir.to_str().unwrap(), "--seed", "8"])?;
    for format in ["json", "md"] {
        let a = cegb(&["analyze", dir.to_str().unwrap(), "--format", format, "--seed", "8"])?;
        let b = cegb(&["analyze", dir.to_str().unwrap(), "--format", format, "--seed", "8"])?;
        ensure(a == b, || format!("{format} output differs between runs"))?;
    }
    for seed in 0..100 {
        let (session, truth) = gen_oracle_bundle(1000 + seed).map_err(|e| e.to_string())?;
        let a = tmp.join(format!("rt{seed}"));
        write_bundle(&session, &truth, &a).map_err(|e| e.to_string())?;
        let loaded = load_session(&a).map_err(|e| e.to_string())?;
        ensure(loaded == session, || format!("bundle {seed}: load(write(s)) != s"))?;
        let b = tmp.join(format!("rt{seed}b"));
        write_session(&loaded, &b).map_err(|e| e.to_string())?;
        let again = load_session(&b).map_err(|e| e.to_string())?;
        ensure(again == session, || format!("bundle {seed}: second round trip differs"))?;
        let m1 = fs::read(a.join("session.json")).unwrap();
        let m2 = fs::read(b.join("session.json")).unwrap();
        ensure(m1 == m2, || format!("bundle {seed}: manifest bytes differ"))?;
    }
    Ok("analyze output byte-identical (json, md); load∘write identity on 100 bundles".into())
}

fn c9_classification() -> Check {
    let ev = |lift: Option<f64>, hold: Option<f64>, slip: bool, release: Option<f64>| AttemptEvents {
        t_grasp_cmd: 100.0,
        t_lift_5cm: lift.map(|l| 100.0 + l),
        hold_duration: hold,
        slip_during_hold: slip,
        t_release_done: release.map(|r| 100.0 + r),
    };
    let cases = [
        ("all clauses met", ev(Some(2.1), Some(3.0), false, Some(6.0)), Outcome::Success, Reason::Satisfied),
        ("never lifted", ev(None, None, false, Some(4.0)), Outcome::Failure, Reason::NoLift),
        ("lift after 3 s", ev(Some(3.4), Some(3.5), false, Some(7.5)), Outcome::Failure, Reason::LiftTooSlow),
        ("lift at exactly 3 s", ev(Some(3.0), Some(3.0), false, Some(6.5)), Outcome::Success, Reason::Satisfied),
        ("hold under 3 s", ev(Some(1.0), Some(2.9), false, Some(4.5)), Outcome::Failure, Reason::HoldTooShort),
        ("slip during hold", ev(Some(1.0), Some(3.0), true, Some(4.5)), Outcome::Failure, Reason::SlipDuringHold),
        ("release after 10 s", ev(Some(2.0), Some(7.5), false, Some(10.2)), Outcome::Failure, Reason::Timeout),
        ("release at exactly 10 s", ev(Some(2.0), Some(7.0), false, Some(10.0)), Outcome::Success, Reason::Satisfied),
    ];
    for (name, events, outcome, reason) in cases {
        let attempt = GraspAttempt {
            object_id: "o".into(),
            pose_index: 1,
            attempt_index: 1,
            events,
            outcome_override: None,
            trace_id: None,
        };
        let v = classify_attempt(&attempt).map_err(|e| e.to_string())?;
        ensure(v.outcome == outcome && v.reason == reason, || {
            format!("{name}: got {:?}/{:?}, want {outcome:?}/{reason:?}", v.outcome, v.reason)
        })?;
        ensure(naive_success(&attempt.events, None) == outcome.is_success(), || {
            format!("{name}: criterion text disagrees")
        })?;
    }
    Ok("8 of 8 cases match".into())
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let root = tmp.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Check>)> = vec![
        ("replica golden report", Box::new(|| c1_replica(root))),
        ("energy-to-weight", Box::new(|| c2_energy_to_weight(root))),
        ("E_hold10 exactness", Box::new(c3_e_hold10)),
        ("integration accuracy", Box::new(c4_integration)),
        ("oracle equivalence", Box::new(|| c5_oracles(root))),
        ("Wilson coverage", Box::new(c6_wilson)),
        ("slip detector robustness", Box::new(c7_slip)),
        ("determinism and round trip", Box::new(|| c8_determinism(root))),
        ("classification rules", Box::new(c9_classification)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match result {
            Ok(detail) => println!("criterion {}: {name} ... PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: {name} ... FAIL ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
