use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::markdown::{num, NOT_MEASURED};
use super::Report;
use crate::metrics::ArtifactKey;

pub const FAMILIES: [&str; 7] = ["ycb", "cycle_time", "grasp_strength", "slip", "transfer", "energy", "payload"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompareError {
    #[error("need at least two reports, got {0}")]
    TooFewReports(usize),
    #[error("report {index} has schema `{found}`, expected `{expected}`")]
    SchemaMismatch {
        index: usize,
        expected: String,
        found: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportColumn {
    pub gripper_name: String,
    pub platform_name: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub metric: String,
    pub unit: String,
    /// One entry per report, `None` where the metric was not measured.
    pub values: Vec<Option<f64>>,
    /// `values[i] - values[0]`; the first entry is always `None`.
    pub deltas: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyComparison {
    pub family: String,
    pub rows: Vec<CompareRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub report_schema: String,
    pub columns: Vec<ReportColumn>,
    pub families: Vec<FamilyComparison>,
}

struct Point {
    family: &'static str,
    metric: String,
    unit: &'static str,
    value: f64,
}

fn artifact_label(key: &ArtifactKey) -> String {
    match &key.grasp_type {
        Some(g) => format!("{} mm, {g}", key.dimension_mm),
        None => format!("{} mm", key.dimension_mm),
    }
}

fn points(report: &Report) -> Vec<Point> {
    let mut out = Vec::new();
    let mut push = |family, metric: String, unit, value| {
        out.push(Point {
            family,
            metric,
            unit,
            value,
        })
    };
    if let Some(y) = &report.ycb {
        push("ycb", "micro-average success".into(), "", y.micro.point);
        push("ycb", "macro-average success".into(), "", y.macro_avg.point);
        for o in &y.per_object {
            push("ycb", format!("{} success", o.object_id), "", o.success_rate);
        }
    }
    if let Some(n) = &report.nist {
        for r in &n.cycle_time {
            push("cycle_time", artifact_label(&r.artifact), "s", r.cycle_time.median);
        }
        for r in &n.grasp_strength {
            push("grasp_strength", artifact_label(&r.artifact), "N", r.strength.f_total.median);
        }
        for r in &n.slip {
            push("slip", artifact_label(&r.artifact), "N", r.f_slip.median);
            if let Some(mu) = &r.mu_eff {
                push("slip", format!("{} mu_eff", artifact_label(&r.artifact)), "", mu.median);
            }
            if let Some(q) = &r.q_hold {
                push("slip", format!("{} Q_hold", artifact_label(&r.artifact)), "", q.median);
            }
        }
    }
    if let Some(t) = &report.transfer {
        push("transfer", "S_transfer".into(), "", t.overall.success.point);
        for g in &t.per_group {
            if let Some(mean) = g.stats.mean_s {
                push("transfer", format!("{} mean", g.group), "s", mean);
            }
        }
        if let Some(mean) = t.overall.mean_s {
            push("transfer", "overall mean".into(), "s", mean);
        }
    }
    if let Some(e) = &report.energy {
        push("energy", "E_grasp".into(), "J", e.e_grasp.median);
        push("energy", "E_hold10".into(), "J", e.e_hold10);
        push("energy", "E_release".into(), "J", e.e_release.median);
        push("energy", "E_cycle".into(), "J", e.e_cycle.median);
        push("energy", "energy-to-weight grasp".into(), "J/g", e.energy_to_weight_grasp);
        push("energy", "energy-to-weight cycle".into(), "J/g", e.energy_to_weight_cycle);
    }
    if let Some(p) = &report.iipb {
        for a in &p.per_artifact {
            push("payload", format!("{:?} {} mm", a.shape, a.dimension_mm).to_lowercase(), "N", a.f_ideal.median);
        }
    }
    out
}

/// Side-by-side view of several reports, in input order. Metrics missing
/// from a report are `None` and render as "not measured".
pub fn compare(reports: &[Report]) -> Result<Comparison, CompareError> {
    if reports.len() < 2 {
        return Err(CompareError::TooFewReports(reports.len()));
    }
    let expected = &reports[0].meta.report_schema;
    for (index, r) in reports.iter().enumerate() {
        if &r.meta.report_schema != expected {
            return Err(CompareError::SchemaMismatch {
                index,
                expected: expected.clone(),
                found: r.meta.report_schema.clone(),
            });
        }
    }
    let n = reports.len();
    let mut families: Vec<FamilyComparison> = FAMILIES
        .iter()
        .map(|f| FamilyComparison {
            family: f.to_string(),
            rows: Vec::new(),
        })
        .collect();
    for (i, r) in reports.iter().enumerate() {
        for p in points(r) {
            let fam = families.iter_mut().find(|f| f.family == p.family).expect("known family");
            let row = match fam.rows.iter().position(|row| row.metric == p.metric) {
                Some(k) => &mut fam.rows[k],
                None => {
                    fam.rows.push(CompareRow {
                        metric: p.metric,
                        unit: p.unit.to_string(),
                        values: vec![None; n],
                        deltas: vec![None; n],
                    });
                    fam.rows.last_mut().expect("just pushed")
                }
            };
            row.values[i] = Some(p.value);
        }
    }
    for fam in &mut families {
        for row in &mut fam.rows {
            let first = row.values[0];
            for i in 1..n {
                row.deltas[i] = first.zip(row.values[i]).map(|(a, b)| b - a);
            }
        }
    }
    Ok(Comparison {
        report_schema: expected.clone(),
        columns: reports
            .iter()
            .map(|r| ReportColumn {
                gripper_name: r.meta.gripper_name.clone(),
                platform_name: r.meta.platform_name.clone(),
                seed: r.meta.seed,
            })
            .collect(),
        families,
    })
}

fn family_title(f: &str) -> &str {
    match f {
        "ycb" => "YCB pick-and-place",
        "cycle_time" => "NIST cycle time",
        "grasp_strength" => "NIST grasp strength",
        "slip" => "NIST slip resistance",
        "transfer" => "Transfer time",
        "energy" => "Energy consumption",
        "payload" => "Ideal payload",
        other => other,
    }
}

fn delta(d: f64) -> String {
    let s = fmt_value(d);
    if d >= 0.0 && !s.starts_with('-') {
        format!("+{s}")
    } else {
        s
    }
}

/// Markdown rendering of a comparison: one table per family.
pub fn render_comparison(c: &Comparison) -> String {
    let mut out = String::from("# Gripper comparison\n\n");
    let labels: Vec<String> = c
        .columns
        .iter()
        .map(|col| format!("{} / {}", col.gripper_name, col.platform_name))
        .collect();
    for fam in &c.families {
        let _ = writeln!(out, "## {}\n", family_title(&fam.family));
        if fam.rows.is_empty() {
            let _ = writeln!(out, "Not measured in any report.\n");
            continue;
        }
        let mut header = vec!["Metric".to_string()];
        header.extend(labels.iter().cloned());
        header.extend(labels.iter().skip(1).map(|l| format!("Δ {l}")));
        let _ = writeln!(out, "| {} |", header.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
        for row in &fam.rows {
            let metric = if row.unit.is_empty() {
                row.metric.clone()
            } else {
                format!("{} [{}]", row.metric, row.unit)
            };
            let mut cells = vec![metric];
            cells.extend(row.values.iter().map(|v| v.map(fmt_value).unwrap_or_else(|| NOT_MEASURED.into())));
            cells.extend(row.deltas.iter().skip(1).map(|d| d.map(delta).unwrap_or_else(|| "-".into())));
            let _ = writeln!(out, "| {} |", cells.join(" | "));
        }
        out.push('\n');
    }
    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}

fn fmt_value(v: f64) -> String {
    if v != 0.0 && v.abs() < 0.01 {
        format!("{v:.3e}")
    } else {
        num(v)
    }
}
