use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use cegb::model::{Manifest, SampledTrace, Session, TraceKind, Trial};
use cegb::report::Report;

fn cegb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cegb"))
        .args(args)
        .env_remove("CEGB_SEED")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = cegb(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn simulate(dir: &Path, kind: &str) {
    ok(&["simulate", kind, dir.to_str().unwrap(), "--seed", "5"]);
}

#[test]
fn validate_and_analyze_replica() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("replica");
    simulate(&dir, "--replica");
    assert!(dir.join("ground_truth.json").is_file());
    assert_eq!(ok(&["validate", dir.to_str().unwrap()]).trim(), "[]");

    let md = ok(&["analyze", dir.to_str().unwrap(), "--format", "md", "--bootstrap", "300"]);
    assert!(md.contains("| 80 | pinch | 3.23 |"));
    assert!(md.contains("Profile code: 2S-P-B"));

    let out = tmp.path().join("r.json");
    let printed = ok(&["analyze", dir.to_str().unwrap(), "--bootstrap", "300", "--out", out.to_str().unwrap()]);
    assert!(printed.is_empty());
    let report = Report::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.meta.config.bootstrap.resamples, 300);
    assert_eq!(report.meta.seed, 42);

    let rendered = ok(&["report", out.to_str().unwrap(), "--format", "md"]);
    assert_eq!(rendered, md);
}

#[test]
fn seed_from_environment_and_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("t");
    simulate(&dir, "--transfer");
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_cegb"));
        cmd.args(["analyze", dir.to_str().unwrap(), "--bootstrap", "200"]).args(extra);
        match env {
            Some(v) => cmd.env("CEGB_SEED", v),
            None => cmd.env_remove("CEGB_SEED"),
        };
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        Report::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap().meta.seed
    };
    assert_eq!(run(None, &[]), 42);
    assert_eq!(run(Some("9"), &[]), 9);
    assert_eq!(run(Some("9"), &["--seed", "3"]), 3);
}

#[test]
fn transfer_only_bundle_reports_one_family() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("t");
    simulate(&dir, "--transfer");
    let json = ok(&["analyze", dir.to_str().unwrap(), "--bootstrap", "200"]);
    let r = Report::from_json(&json).unwrap();
    assert!(r.transfer.is_some());
    assert!(r.ycb.is_none() && r.nist.is_none() && r.energy.is_none() && r.iipb.is_none());
    assert!(json.contains("\"ycb\": null"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(cegb(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cegb(&["analyze"]).status.code(), Some(2));
    assert_eq!(cegb(&["simulate", "x"]).status.code(), Some(2));
    assert_eq!(cegb(&["analyze", "x", "--format", "pdf"]).status.code(), Some(2));
    assert_eq!(cegb(&["timer", "--group", "Master", "--participant", "p"]).status.code(), Some(2));

    let missing = tmp.path().join("nothing");
    let out = cegb(&["analyze", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("session.json"));

    let dir = tmp.path().join("bad");
    simulate(&dir, "--ycb");
    let manifest = dir.join("session.json");
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    v["gripper_name"] = serde_json::json!("");
    fs::write(&manifest, v.to_string()).unwrap();
    let out = cegb(&["validate", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("gripper and platform names non-empty"));
    assert_eq!(cegb(&["analyze", dir.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn compare_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let replica = tmp.path().join("replica");
    let transfer = tmp.path().join("transfer");
    simulate(&replica, "--replica");
    simulate(&transfer, "--transfer");
    let a = tmp.path().join("a.json");
    let b = tmp.path().join("b.json");
    let c = tmp.path().join("c.json");
    ok(&["analyze", replica.to_str().unwrap(), "--bootstrap", "200", "--out", a.to_str().unwrap()]);
    ok(&["analyze", transfer.to_str().unwrap(), "--bootstrap", "200", "--out", b.to_str().unwrap()]);
    fs::copy(&a, &c).unwrap();

    let json = ok(&["compare", a.to_str().unwrap(), c.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    for fam in v["families"].as_array().unwrap() {
        for row in fam["rows"].as_array().unwrap() {
            assert_eq!(row["deltas"][1], serde_json::json!(0.0));
        }
    }

    let md = ok(&["compare", a.to_str().unwrap(), b.to_str().unwrap(), c.to_str().unwrap(), "--format", "md"]);
    let header = md.lines().find(|l| l.starts_with("| Metric")).unwrap();
    assert_eq!(
        header,
        "| Metric | Reference gripper prototype / Industrial manipulator | synthetic gripper / synthetic platform \
         | Reference gripper prototype / Industrial manipulator | Δ synthetic gripper / synthetic platform \
         | Δ Reference gripper prototype / Industrial manipulator |"
    );
    assert!(md.contains("not measured"));

    assert_eq!(cegb(&["compare", a.to_str().unwrap()]).status.code(), Some(2));
    let text = fs::read_to_string(&b).unwrap();
    fs::write(&b, text.replace("cegb-report-1", "cegb-report-0")).unwrap();
    let out = cegb(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));
}

#[test]
fn plotdata_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("replica");
    simulate(&dir, "--replica");
    let csv = ok(&["plotdata", dir.to_str().unwrap(), "power_3"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t_s,p_W_raw,p_W_smooth,phase"));
    let phases: Vec<&str> = lines.map(|l| l.rsplit(',').next().unwrap()).collect();
    for p in ["Grasp", "Hold", "Release"] {
        assert!(phases.contains(&p), "{p}");
    }
    assert_eq!(cegb(&["plotdata", dir.to_str().unwrap(), "power_99"]).status.code(), Some(1));

    let flat = tmp.path().join("flat");
    let mut s = Session::new(Manifest::new("g", "p"));
    let times: Vec<f64> = (0..300).map(|i| i as f64 * 0.01).collect();
    s.traces.insert("flat".into(), SampledTrace::scalar(TraceKind::Power, times, vec![0.4; 300]).unwrap());
    s.trials.push(Trial::Energy {
        trace: "flat".into(),
        object_mass_g: 100.0,
        t_hold_nominal_s: None,
    });
    cegb::ingest::write_session(&s, &flat).unwrap();
    let out_csv = tmp.path().join("flat.csv");
    let out = cegb(&["plotdata", flat.to_str().unwrap(), "flat", "--out", out_csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let text = fs::read_to_string(&out_csv).unwrap();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[1], cols[2]);
        assert_eq!(cols[3], "unknown");
    }
}

#[test]
fn timer_appends_rows_from_stdin() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("transfers.csv");
    let mut child = Command::new(env!("CARGO_BIN_EXE_cegb"))
        .args(["timer", "--group", "Master", "--participant", "m07", "--out", out.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"s\ne\ns\ns\na\nq\n").unwrap();
    let status = child.wait().unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "participant_id,group,duration_s,fault_mech,fault_elec,fault_sw");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("m07,Master,"));
    assert!(lines[1].ends_with(",0,1,0"));
}
