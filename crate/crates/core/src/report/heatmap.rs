use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{csv_string, escape, fill_for, legend, svg_open, write_file};
use crate::biovars::BioVariablePanel;
use crate::error::{ReportError, Result};
use crate::io::opt_cell;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub subject_id: String,
    pub age: f64,
    /// One entry per variable, each in [0, 1] or absent.
    pub values: Vec<Option<f64>>,
}

/// Subjects × variables matrix of [0, 1] values.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortSummary {
    pub variables: Vec<String>,
    pub rows: Vec<SummaryRow>,
}

impl CohortSummary {
    /// Builds the matrix from panel cells; every panel must expose the same
    /// variables in the same order.
    pub fn from_panels(panels: &[BioVariablePanel]) -> Result<Self, ReportError> {
        let mut variables: Option<Vec<String>> = None;
        let mut rows = Vec::with_capacity(panels.len());
        for p in panels {
            let (labels, values): (Vec<String>, Vec<Option<f64>>) = p.cells().into_iter().unzip();
            match &variables {
                None => variables = Some(labels),
                Some(v) if *v != labels => {
                    return Err(ReportError::Schema(format!(
                        "panel {} has a different variable set",
                        p.subject_id
                    )))
                }
                Some(_) => {}
            }
            rows.push(SummaryRow {
                subject_id: p.subject_id.clone(),
                age: p.age,
                values,
            });
        }
        let summary = CohortSummary {
            variables: variables.unwrap_or_default(),
            rows,
        };
        summary.validate()?;
        Ok(summary)
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        if self.rows.is_empty() {
            return Err(ReportError::Schema("heat map needs at least one subject".into()));
        }
        for r in &self.rows {
            if r.values.len() != self.variables.len() {
                return Err(ReportError::Schema(format!(
                    "subject {} has {} values for {} variables",
                    r.subject_id,
                    r.values.len(),
                    self.variables.len()
                )));
            }
            if let Some(v) = r.values.iter().flatten().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(ReportError::Schema(format!(
                    "subject {}: value {v} outside the [0, 1] color scale",
                    r.subject_id
                )));
            }
        }
        Ok(())
    }

    /// Rows ordered by age, then subject id.
    pub fn sorted_by_age(&self) -> Vec<&SummaryRow> {
        let mut rows: Vec<&SummaryRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| a.age.total_cmp(&b.age).then_with(|| a.subject_id.cmp(&b.subject_id)));
        rows
    }
}

const CELL_W: u32 = 24;
const CELL_H: u32 = 18;
const LEFT: u32 = 110;
const TOP: u32 = 160;

/// Writes `heatmap.csv` and `heatmap.svg`, subjects sorted by age.
pub fn emit_cohort_heatmap(summary: &CohortSummary, out_dir: &Path) -> Result<Vec<PathBuf>> {
    summary.validate()?;
    let rows = summary.sorted_by_age();

    let mut header = vec!["subject_id".to_string(), "age".to_string()];
    header.extend(summary.variables.iter().cloned());
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut line = vec![r.subject_id.clone(), r.age.to_string()];
            line.extend(r.values.iter().map(|v| opt_cell(*v)));
            line
        })
        .collect();
    let csv = csv_string(&header, &body)?;

    let n_cols = summary.variables.len() as u32;
    let width = LEFT + CELL_W * n_cols + 20;
    let height = TOP + CELL_H * rows.len() as u32 + 50;
    let mut svg = svg_open(width, height);
    for (j, name) in summary.variables.iter().enumerate() {
        let x = LEFT + CELL_W * j as u32 + CELL_W / 2;
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{}" transform="rotate(-60 {x} {})">{}</text>"#,
            TOP - 6,
            TOP - 6,
            escape(name)
        );
    }
    for (i, r) in rows.iter().enumerate() {
        let y = TOP + CELL_H * i as u32;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{} ({})</text>"#,
            LEFT - 6,
            y + CELL_H - 5,
            escape(&r.subject_id),
            r.age
        );
        for (j, v) in r.values.iter().enumerate() {
            let _ = writeln!(
                svg,
                r##"<rect class="cell" fill="{}" x="{}" y="{y}" width="{CELL_W}" height="{CELL_H}" stroke="#ffffff"/>"##,
                fill_for(*v),
                LEFT + CELL_W * j as u32
            );
        }
    }
    legend(&mut svg, LEFT, TOP + CELL_H * rows.len() as u32 + 14);
    svg.push_str("</svg>\n");

    Ok(vec![
        write_file(out_dir, "heatmap.csv", &csv)?,
        write_file(out_dir, "heatmap.svg", &svg)?,
    ])
}
