//! Every metric family recovers the generator's ground truth on
//! zero-noise bundles read back from disk.

use cegb::ingest::load_session;
use cegb::report::{analyze, AnalysisConfig, Report};
use cegb::synth::{gen_oracle_bundle, read_ground_truth, write_bundle, ArtifactTruth, GroundTruth};

const REL: f64 = 1e-3;

fn close(got: f64, want: f64, what: &str) {
    let tol = REL * want.abs().max(1e-12);
    assert!((got - want).abs() <= tol, "{what}: got {got}, want {want}");
}

fn check_rows<'a>(rows: impl Iterator<Item = (&'a str, f64)>, truth: &[ArtifactTruth], family: &str) {
    let rows: Vec<_> = rows.collect();
    assert_eq!(rows.len(), truth.len(), "{family} row count");
    for t in truth {
        let (_, got) = rows.iter().find(|(id, _)| *id == t.artifact_id).expect("artifact row");
        close(*got, t.median, &format!("{family} {}", t.artifact_id));
    }
}

fn check(report: &Report, truth: &GroundTruth, session: &cegb::model::Session) {
    let y = report.ycb.as_ref().unwrap();
    let yt = truth.ycb.as_ref().unwrap();
    assert_eq!(y.micro.point, yt.micro);
    assert_eq!(y.macro_avg.point, yt.macro_avg);
    assert_eq!((y.micro.successes, y.micro.trials), (yt.successes, yt.attempts));

    let n = report.nist.as_ref().unwrap();
    check_rows(
        n.cycle_time.iter().map(|r| (r.artifact.artifact_id.as_str(), r.cycle_time.median)),
        &truth.cycle_time,
        "cycle_time",
    );
    check_rows(
        n.grasp_strength
            .iter()
            .map(|r| (r.artifact.artifact_id.as_str(), r.strength.f_total.median)),
        &truth.grasp_strength,
        "grasp_strength",
    );
    check_rows(
        n.slip.iter().map(|r| (r.artifact.artifact_id.as_str(), r.f_slip.median)),
        &truth.slip,
        "slip",
    );

    let p = report.iipb.as_ref().unwrap();
    assert_eq!(Some(&p.profile_code), truth.profile_code.as_ref());
    for t in &truth.payload {
        let dim = session.artifacts[&t.artifact_id].characteristic_dimension_mm;
        let row = p.per_artifact.iter().find(|a| a.dimension_mm == dim).unwrap();
        close(row.f_ideal.median, t.median, &format!("payload {}", t.artifact_id));
        assert_eq!(row.safety_limit_trials, t.safety_limit_trials);
    }

    let e = report.energy.as_ref().unwrap();
    let et = truth.energy.as_ref().unwrap();
    close(e.e_grasp.median, et.e_grasp, "e_grasp");
    close(e.e_hold.median, et.e_hold, "e_hold");
    close(e.e_release.median, et.e_release, "e_release");
    close(e.e_cycle.median, et.e_cycle, "e_cycle");
    close(e.e_hold10, et.e_hold10, "e_hold10");
    close(e.energy_to_weight_grasp, et.energy_to_weight_grasp, "grasp ratio");
    close(e.energy_to_weight_cycle, et.energy_to_weight_cycle, "cycle ratio");

    match (&report.transfer, &truth.transfer) {
        (None, None) => {}
        (Some(t), Some(tt)) => {
            assert_eq!(t.overall.success.point, tt.s_transfer);
            for g in &tt.groups {
                let row = t.per_group.iter().find(|r| r.group == g.group).unwrap();
                assert_eq!(row.stats.n_cycles, g.n_cycles);
                close(row.stats.mean_s.unwrap(), g.generated_mean_s.unwrap_or(g.mean_s), "transfer mean");
            }
        }
        _ => panic!("transfer family presence differs from truth"),
    }
}

#[test]
fn oracle_bundles_recover_ground_truth() {
    let root = tempfile::tempdir().unwrap();
    let cfg = AnalysisConfig::new(7, 200);
    for seed in 0..100 {
        let dir = root.path().join(seed.to_string());
        let (session, truth) = gen_oracle_bundle(seed).unwrap();
        write_bundle(&session, &truth, &dir).unwrap();
        let loaded = load_session(&dir).unwrap();
        let truth = read_ground_truth(&dir).unwrap();
        let report = analyze(&loaded, &cfg).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        check(&report, &truth, &loaded);
    }
}
