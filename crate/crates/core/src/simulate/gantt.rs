use std::fmt::Write as _;
use std::path::Path;

use crate::domain::Instance;
use crate::error::Result;
use crate::scenario::Scenario;

use super::SecondStageOutcome;

const PX_PER_MIN: f64 = 3.0;
const ROW_H: f64 = 28.0;
const LEFT: f64 = 60.0;
const TOP: f64 = 24.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GanttBar {
    /// Row label such as `IR1` or `OR2`.
    pub row: String,
    pub kind: &'static str,
    pub patient: usize,
    pub start: f64,
    pub end: f64,
}

fn rows(instance: &Instance, outcome: &SecondStageOutcome) -> Vec<String> {
    let mut out: Vec<String> = (0..outcome.ir_closure.len()).map(|k| format!("IR{}", k + 1)).collect();
    out.extend((0..instance.num_ors).map(|r| format!("OR{}", r + 1)));
    out
}

/// Induction, surgery and turnover intervals. Serial outcomes draw induction on the OR row.
pub fn bars(instance: &Instance, outcome: &SecondStageOutcome, s: &Scenario) -> Vec<GanttBar> {
    let serial = outcome.ir_assignment.is_empty();
    let mut out = Vec::new();
    for i in 0..instance.len() {
        let or_row = format!("OR{}", instance.patients[i].or_id + 1);
        let a = outcome.surgery_start[i];
        let (ind_row, ind_start) = if serial {
            (or_row.clone(), a - s.induction[i])
        } else {
            (format!("IR{}", outcome.ir_assignment[i] + 1), outcome.induction_start[i])
        };
        out.push(GanttBar { row: ind_row, kind: "induction", patient: i, start: ind_start, end: ind_start + s.induction[i] });
        out.push(GanttBar { row: or_row.clone(), kind: "surgery", patient: i, start: a, end: a + s.surgery[i] });
        out.push(GanttBar {
            row: or_row,
            kind: "turnover",
            patient: i,
            start: a + s.surgery[i],
            end: a + s.surgery[i] + s.turnover[i],
        });
    }
    out
}

pub fn gantt_svg(instance: &Instance, outcome: &SecondStageOutcome, s: &Scenario) -> String {
    let labels = rows(instance, outcome);
    let bars = bars(instance, outcome, s);
    let horizon = bars.iter().map(|b| b.end).fold(0.0_f64, f64::max);
    let width = LEFT + horizon * PX_PER_MIN + 20.0;
    let height = TOP + ROW_H * labels.len() as f64 + 10.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    for (idx, label) in labels.iter().enumerate() {
        let y = TOP + ROW_H * idx as f64;
        let _ = writeln!(svg, r#"<text class="row" x="4" y="{}">{label}</text>"#, y + ROW_H * 0.6);
    }
    for bar in &bars {
        let idx = labels.iter().position(|l| *l == bar.row).unwrap_or(0);
        let y = TOP + ROW_H * idx as f64 + 4.0;
        let x = LEFT + bar.start * PX_PER_MIN;
        let w = (bar.end - bar.start) * PX_PER_MIN;
        let fill = if bar.kind == "turnover" { "#333333" } else { "#ffffff" };
        let _ = writeln!(
            svg,
            r##"<rect class="{}" data-row="{}" data-patient="{}" data-start="{}" data-end="{}" x="{x}" y="{y}" width="{w}" height="{}" fill="{fill}" stroke="#000000"/>"##,
            bar.kind,
            bar.row,
            bar.patient + 1,
            bar.start,
            bar.end,
            ROW_H - 8.0
        );
        if bar.kind != "turnover" {
            let _ = writeln!(svg, r#"<text x="{}" y="{}">P{}</text>"#, x + 2.0, y + ROW_H * 0.5, bar.patient + 1);
        }
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn gantt_text(instance: &Instance, outcome: &SecondStageOutcome, s: &Scenario) -> String {
    let labels = rows(instance, outcome);
    let mut bars = bars(instance, outcome, s);
    bars.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.patient.cmp(&b.patient)));
    let mut text = String::from("row  kind       patient  start    end\n");
    for label in &labels {
        for bar in bars.iter().filter(|b| b.row == *label) {
            let _ = writeln!(
                text,
                "{:<4} {:<10} P{:<7} {:>7.2} {:>7.2}",
                bar.row,
                bar.kind,
                bar.patient + 1,
                bar.start,
                bar.end
            );
        }
    }
    text
}

/// Writes `path` as SVG and a plain-text timeline next to it with extension `txt`.
pub fn export_gantt(instance: &Instance, outcome: &SecondStageOutcome, s: &Scenario, path: &Path) -> Result<()> {
    std::fs::write(path, gantt_svg(instance, outcome, s))?;
    std::fs::write(path.with_extension("txt"), gantt_text(instance, outcome, s))?;
    Ok(())
}
