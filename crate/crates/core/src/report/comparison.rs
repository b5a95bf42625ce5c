use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{csv_string, escape, write_file};
use crate::error::{ReportError, Result};
use crate::estimators::{mean_ci95, Estimates, Mode, Source, SweepRow};
use crate::io::opt_cell;

/// Mean per-subject test RMSE of one estimator, with its 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// Group label, e.g. `global`, `personal` or `span 42`.
    pub group: String,
    pub source: Source,
    pub n_subjects: usize,
    pub mean_rmse: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

impl ComparisonRow {
    /// One row per source present in `est`, grouped under the mode name.
    pub fn from_estimates(mode: Mode, est: &Estimates) -> Vec<ComparisonRow> {
        Source::ALL
            .iter()
            .filter_map(|&source| {
                let errs: Vec<f64> = est.subject_rmse(source).into_values().collect();
                let (mean, ci) = mean_ci95(&errs)?;
                Some(ComparisonRow {
                    group: mode.name().to_string(),
                    source,
                    n_subjects: errs.len(),
                    mean_rmse: mean,
                    ci_low: ci.map(|c| c.0),
                    ci_high: ci.map(|c| c.1),
                })
            })
            .collect()
    }

    pub fn from_sweep(rows: &[SweepRow]) -> Vec<ComparisonRow> {
        rows.iter()
            .map(|r| ComparisonRow {
                group: format!("span {}", r.span_days),
                source: r.source,
                n_subjects: r.n_subjects,
                mean_rmse: r.mean_rmse,
                ci_low: r.ci_low,
                ci_high: r.ci_high,
            })
            .collect()
    }
}

const SOURCE_COLORS: [&str; 4] = ["#6baed6", "#fd8d3c", "#74c476", "#a50f15"];

fn color(source: Source) -> &'static str {
    SOURCE_COLORS[Source::ALL.iter().position(|&s| s == source).unwrap_or(0)]
}

const LEFT: f64 = 60.0;
const TOP: f64 = 30.0;
const PLOT_H: f64 = 240.0;
const BAR_W: f64 = 18.0;
const GROUP_GAP: f64 = 24.0;

/// Writes `comparison.csv` and `comparison.svg`: grouped bars of mean RMSE
/// with 95% interval whiskers, groups in first-seen order.
pub fn emit_model_comparison(rows: &[ComparisonRow], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(ReportError::Schema("model comparison needs at least one row".into()).into());
    }
    if let Some(r) = rows.iter().find(|r| !(r.mean_rmse.is_finite() && r.mean_rmse >= 0.0)) {
        return Err(ReportError::Schema(format!("{} {}: invalid rmse {}", r.group, r.source, r.mean_rmse)).into());
    }

    let header: Vec<String> = ["group", "source", "n_subjects", "mean_rmse", "ci_low", "ci_high"]
        .map(String::from)
        .to_vec();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.group.clone(),
                r.source.name().to_string(),
                r.n_subjects.to_string(),
                r.mean_rmse.to_string(),
                opt_cell(r.ci_low),
                opt_cell(r.ci_high),
            ]
        })
        .collect();
    let csv = csv_string(&header, &body)?;

    let mut groups: Vec<&str> = Vec::new();
    for r in rows {
        if !groups.contains(&r.group.as_str()) {
            groups.push(&r.group);
        }
    }
    let top_value = rows
        .iter()
        .map(|r| r.ci_high.unwrap_or(r.mean_rmse).max(r.mean_rmse))
        .fold(0.0_f64, f64::max)
        .max(1e-9)
        * 1.1;
    let y = |v: f64| TOP + PLOT_H * (1.0 - v / top_value);
    let group_w = BAR_W * Source::ALL.len() as f64 + GROUP_GAP;
    let width = (LEFT + group_w * groups.len() as f64 + 120.0).ceil() as u32;
    let height = (TOP + PLOT_H + 50.0) as u32;

    let mut svg = super::svg_open(width, height);
    let _ = writeln!(
        svg,
        r##"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="#333333"/>"##,
        TOP + PLOT_H
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">test RMSE (mL/kg/min)</text>"#,
        TOP + PLOT_H / 2.0,
        TOP + PLOT_H / 2.0
    );
    for k in 0..=4 {
        let v = top_value * f64::from(k) / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
            LEFT - 4.0,
            y(v) + 4.0
        );
    }
    for (g, group) in groups.iter().enumerate() {
        let x0 = LEFT + GROUP_GAP / 2.0 + group_w * g as f64;
        for r in rows.iter().filter(|r| r.group == *group) {
            let slot = Source::ALL.iter().position(|&s| s == r.source).unwrap_or(0) as f64;
            let x = x0 + BAR_W * slot;
            let _ = writeln!(
                svg,
                r#"<rect class="bar" x="{x:.1}" y="{:.2}" width="{}" height="{:.2}" fill="{}"/>"#,
                y(r.mean_rmse),
                BAR_W - 2.0,
                y(0.0) - y(r.mean_rmse),
                color(r.source)
            );
            if let (Some(lo), Some(hi)) = (r.ci_low, r.ci_high) {
                let cx = x + (BAR_W - 2.0) / 2.0;
                let _ = writeln!(
                    svg,
                    r##"<line x1="{cx:.1}" y1="{:.2}" x2="{cx:.1}" y2="{:.2}" stroke="#000000"/>"##,
                    y(lo.max(0.0)),
                    y(hi)
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            x0 + BAR_W * Source::ALL.len() as f64 / 2.0,
            TOP + PLOT_H + 16.0,
            escape(group)
        );
    }
    let lx = LEFT + group_w * groups.len() as f64 + 10.0;
    for (i, s) in Source::ALL.iter().enumerate() {
        let ly = TOP + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{lx:.1}" y="{ly}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{}">{}</text>"#,
            color(*s),
            lx + 14.0,
            ly + 9.0,
            s.name()
        );
    }
    svg.push_str("</svg>\n");

    Ok(vec![
        write_file(out_dir, "comparison.csv", &csv)?,
        write_file(out_dir, "comparison.svg", &svg)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(group: &str, source: Source, mean: f64) -> ComparisonRow {
        ComparisonRow {
            group: group.into(),
            source,
            n_subjects: 12,
            mean_rmse: mean,
            ci_low: Some(mean - 0.5),
            ci_high: Some(mean + 0.5),
        }
    }

    #[test]
    fn writes_one_bar_per_row() {
        let dir = tempfile::tempdir().unwrap();
        let rows: Vec<_> = ["global", "personal"]
            .iter()
            .flat_map(|g| Source::ALL.map(|s| row(g, s, 2.0)))
            .collect();
        let files = emit_model_comparison(&rows, dir.path()).unwrap();
        let svg = std::fs::read_to_string(&files[1]).unwrap();
        assert_eq!(svg.matches(r#"class="bar""#).count(), 8);
        let csv = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(csv.lines().count(), 9);
        assert!(csv.starts_with("group,source,n_subjects,mean_rmse,ci_low,ci_high\nglobal,TIME,12,2,1.5,2.5\n"));
    }

    #[test]
    fn rejects_empty_and_invalid() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_model_comparison(&[], dir.path()).is_err());
        assert!(emit_model_comparison(&[row("g", Source::Vam, f64::NAN)], dir.path()).is_err());
    }
}
