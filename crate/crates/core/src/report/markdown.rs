use std::fmt::Write;

use super::Report;
use crate::metrics::ArtifactKey;
use crate::model::{ArtifactShape, Compliance, GripType, IdealShape, SummaryStat};

pub(super) const NOT_MEASURED: &str = "not measured";

pub(super) fn num(x: f64) -> String {
    format!("{x:.2}")
}

pub(super) fn ci(c: (f64, f64)) -> String {
    format!("[{:.2}, {:.2}]", c.0, c.1)
}

fn ratio(x: f64) -> String {
    format!("{x:.3e}")
}

fn dim(d: f64) -> String {
    format!("{d}")
}

fn grasp(key: &ArtifactKey) -> &str {
    key.grasp_type.as_deref().unwrap_or("-")
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for row in rows {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
    out.push('\n');
}

fn section(out: &mut String, title: &str) {
    let _ = writeln!(out, "## {title}\n");
}

fn missing(out: &mut String) {
    let _ = writeln!(out, "{}\n", capitalize(NOT_MEASURED));
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

fn optional(s: &Option<SummaryStat>) -> (String, String) {
    match s {
        Some(s) => (num(s.median), ci(s.ci95)),
        None => (NOT_MEASURED.to_string(), NOT_MEASURED.to_string()),
    }
}

fn compliance_label(c: Compliance) -> &'static str {
    match c {
        Compliance::R => "Rigid",
        Compliance::S1 => "Compliant in 1 main axis",
        Compliance::S2 => "Compliant in 2 main axes",
        Compliance::F => "Compliant in 3 main axes",
    }
}

fn grip_label(g: GripType) -> &'static str {
    match g {
        GripType::Wrap => "Wrap",
        GripType::Pinch => "Pinch",
    }
}

fn shape_label(s: IdealShape) -> &'static str {
    match s {
        IdealShape::Cylinder => "Cylinder artifacts",
        IdealShape::Box => "Box-type artifacts",
        IdealShape::Sphere => "Sphere artifacts",
    }
}

fn artifact_shape(s: ArtifactShape) -> &'static str {
    match s {
        ArtifactShape::Cylinder => "cylinder",
        ArtifactShape::Box => "box",
        ArtifactShape::Sphere => "sphere",
    }
}

/// Renders a report as Markdown tables laid out like the published ones.
pub fn render_markdown(report: &Report) -> String {
    let m = &report.meta;
    let mut out = String::new();
    let _ = writeln!(out, "# Benchmark report: {} on {}\n", m.gripper_name, m.platform_name);
    let _ = writeln!(
        out,
        "{} {}, report schema {}, session schema {}, seed {}, bootstrap B = {}, confidence {}.\n",
        m.tool, m.tool_version, m.report_schema, m.session_schema, m.seed, m.config.bootstrap.resamples,
        m.config.bootstrap.confidence
    );
    if !report.violations.is_empty() {
        section(&mut out, "Violations");
        for v in &report.violations {
            let _ = writeln!(out, "- {v}");
        }
        out.push('\n');
    }

    section(&mut out, "YCB pick-and-place");
    match &report.ycb {
        None => missing(&mut out),
        Some(y) => {
            let rows: Vec<Vec<String>> = y
                .per_object
                .iter()
                .map(|o| {
                    vec![
                        o.object_id.clone(),
                        o.poses.to_string(),
                        o.attempts_per_pose.to_string(),
                        num(o.success_rate),
                    ]
                })
                .collect();
            table(&mut out, &["Object", "Poses", "Attempts per pose", "Success rate"], &rows);
            let mut rows = vec![
                vec![
                    "Micro-average".to_string(),
                    num(y.micro.point),
                    ci(y.micro.wilson95),
                    format!("{}/{}", y.micro.successes, y.micro.trials),
                ],
                vec![
                    "Macro-average".to_string(),
                    num(y.macro_avg.point),
                    ci(y.macro_avg.ci95),
                    format!("{} objects", y.per_object.len()),
                ],
            ];
            for (label, s) in [("Time to lift [s]", &y.time_to_lift), ("Time to release [s]", &y.time_to_release)] {
                let (v, c) = optional(s);
                let n = s.as_ref().map(|s| s.n.to_string()).unwrap_or_else(|| "0".into());
                rows.push(vec![label.to_string(), v, c, n]);
            }
            table(&mut out, &["Metric", "Value", "95% CI", "n"], &rows);
        }
    }

    let nist = report.nist.as_ref();
    section(&mut out, "NIST cycle time");
    match nist.filter(|n| !n.cycle_time.is_empty()) {
        None => missing(&mut out),
        Some(n) => {
            let rows: Vec<Vec<String>> = n
                .cycle_time
                .iter()
                .map(|r| {
                    vec![
                        dim(r.artifact.dimension_mm),
                        grasp(&r.artifact).to_string(),
                        num(r.cycle_time.median),
                        ci(r.cycle_time.ci95),
                        r.cycle_time.n.to_string(),
                    ]
                })
                .collect();
            table(&mut out, &["Artifact [mm]", "Grasp Type", "Median [s]", "95% CI [s]", "n"], &rows);
        }
    }

    section(&mut out, "NIST grasp strength");
    match nist.filter(|n| !n.grasp_strength.is_empty()) {
        None => missing(&mut out),
        Some(n) => {
            let rows: Vec<Vec<String>> = n
                .grasp_strength
                .iter()
                .map(|r| {
                    let f = &r.strength.f_total;
                    vec![
                        format!("{} mm", dim(r.artifact.dimension_mm)),
                        grasp(&r.artifact).to_string(),
                        num(f.median),
                        ci(f.ci95),
                        num(r.strength.peak.median),
                        f.n.to_string(),
                    ]
                })
                .collect();
            table(
                &mut out,
                &["Artifact", "Grasp Type", "Median [N]", "95% CI [N]", "Peak [N]", "n"],
                &rows,
            );
        }
    }

    section(&mut out, "NIST slip resistance");
    match nist.filter(|n| !n.slip.is_empty()) {
        None => missing(&mut out),
        Some(n) => {
            let rows: Vec<Vec<String>> = n
                .slip
                .iter()
                .map(|r| {
                    let mu = r.mu_eff.as_ref().map(|s| num(s.median)).unwrap_or_else(|| NOT_MEASURED.into());
                    let q = r.q_hold.as_ref().map(|s| num(s.median)).unwrap_or_else(|| NOT_MEASURED.into());
                    vec![
                        dim(r.artifact.dimension_mm),
                        grasp(&r.artifact).to_string(),
                        num(r.f_slip.median),
                        ci(r.f_slip.ci95),
                        mu,
                        q,
                        r.safety_limit_trials.to_string(),
                    ]
                })
                .collect();
            table(
                &mut out,
                &["Artifact [mm]", "Grasp Type", "Median [N]", "95% CI [N]", "mu_eff", "Q_hold", "Safety stops"],
                &rows,
            );
        }
    }

    section(&mut out, "Transfer time");
    match &report.transfer {
        None => missing(&mut out),
        Some(t) => {
            let row = |label: String, s: &crate::metrics::TransferStats| {
                let (median, c) = optional(&s.summary);
                vec![
                    label,
                    s.n_cycles.to_string(),
                    s.mean_s.map(num).unwrap_or_else(|| NOT_MEASURED.into()),
                    median,
                    c,
                    num(s.success.point),
                    ci(s.success.wilson95),
                ]
            };
            let mut rows: Vec<Vec<String>> =
                t.per_group.iter().map(|g| row(g.group.to_string(), &g.stats)).collect();
            rows.push(row("All".to_string(), &t.overall));
            table(
                &mut out,
                &["Group", "Cycles", "Mean [s]", "Median [s]", "95% CI [s]", "S_transfer", "Wilson 95% CI"],
                &rows,
            );
        }
    }

    section(&mut out, "Energy consumption");
    match &report.energy {
        None => missing(&mut out),
        Some(e) => {
            let rows = vec![
                vec!["Grasping".to_string(), num(e.e_grasp.median), ci(e.e_grasp.ci95)],
                vec!["Holding".to_string(), num(e.e_hold.median), ci(e.e_hold.ci95)],
                vec!["Holding 10s".to_string(), num(e.e_hold10), ci(e.e_hold10_summary.ci95)],
                vec!["Releasing".to_string(), num(e.e_release.median), ci(e.e_release.ci95)],
                vec!["Full cycle".to_string(), num(e.e_cycle.median), ci(e.e_cycle.ci95)],
            ];
            table(&mut out, &["Cycle phase", "Median [J]", "95% CI [J]"], &rows);
            let rows = vec![
                vec!["Grasping".to_string(), ratio(e.energy_to_weight_grasp)],
                vec!["Full cycle".to_string(), ratio(e.energy_to_weight_cycle)],
            ];
            table(&mut out, &["Energy-to-weight", "Median [J/g]"], &rows);
        }
    }

    section(&mut out, "Ideal payload");
    match &report.iipb {
        None => missing(&mut out),
        Some(p) => {
            if let Some(g) = &m.gripper_profile {
                let rows = vec![
                    vec![
                        "Compliance Type".to_string(),
                        compliance_label(g.compliance).to_string(),
                        g.compliance.code().to_string(),
                    ],
                    vec![
                        "Preferred Grip Type".to_string(),
                        grip_label(g.grip_type).to_string(),
                        g.grip_type.code().to_string(),
                    ],
                    vec![
                        "Ideal Object Shape".to_string(),
                        shape_label(g.ideal_shape).to_string(),
                        g.ideal_shape.code().to_string(),
                    ],
                    vec![
                        "Gripping Range".to_string(),
                        format!("{}-{} mm", dim(g.range_mm[0]), dim(g.range_mm[1])),
                        "-".to_string(),
                    ],
                ];
                table(&mut out, &["Gripper Parameter", "Option", "Code"], &rows);
            }
            let _ = writeln!(out, "Profile code: {}\n", p.profile_code);
            let rows: Vec<Vec<String>> = p
                .per_artifact
                .iter()
                .map(|a| {
                    vec![
                        format!("{} ({})", dim(a.dimension_mm), artifact_shape(a.shape)),
                        num(a.f_ideal.median),
                        ci(a.f_ideal.ci95),
                        a.safety_limit_trials.to_string(),
                    ]
                })
                .collect();
            table(
                &mut out,
                &["Artifact [mm]", "Ideal Max Load [N]", "95% CI [N]", "Safety stops"],
                &rows,
            );
        }
    }
    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}
