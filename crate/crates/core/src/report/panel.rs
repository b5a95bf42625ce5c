use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{csv_string, escape, fill_for, legend, svg_open, write_file};
use crate::biovars::BioVariablePanel;
use crate::error::Result;
use crate::io::opt_cell;

const ROW_H: u32 = 20;
const LABEL_W: u32 = 160;
const BAR_W: u32 = 200;
const TOP: u32 = 40;

/// Writes `panel_<subject>.csv` (one row of [0, 1] cells) and
/// `panel_<subject>.svg` (one gauge per cell; absent cells hatched).
pub fn emit_subject_panel(panel: &BioVariablePanel, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let cells = panel.cells();
    let mut header = vec!["subject_id".to_string(), "age".to_string()];
    header.extend(cells.iter().map(|(label, _)| label.clone()));
    let mut row = vec![panel.subject_id.clone(), panel.age.to_string()];
    row.extend(cells.iter().map(|(_, v)| opt_cell(*v)));
    let csv = csv_string(&header, &[row])?;

    let height = TOP + ROW_H * cells.len() as u32 + 40;
    let width = LABEL_W + BAR_W + 70;
    let mut svg = svg_open(width, height);
    let _ = writeln!(
        svg,
        r#"<text x="10" y="20" font-size="14">{} (age {})</text>"#,
        escape(&panel.subject_id),
        panel.age
    );
    for (i, (label, value)) in cells.iter().enumerate() {
        let y = TOP + ROW_H * i as u32;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LABEL_W - 8,
            y + ROW_H - 6,
            escape(label)
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{LABEL_W}" y="{}" width="{BAR_W}" height="{}" fill="none" stroke="#cccccc"/>"##,
            y + 2,
            ROW_H - 4
        );
        let (bar, text) = match value {
            Some(v) => (((f64::from(BAR_W) * v.clamp(0.0, 1.0)).round() as u32).max(1), format!("{v:.2}")),
            None => (BAR_W, "n/a".to_string()),
        };
        let _ = writeln!(
            svg,
            r#"<rect class="cell" fill="{}" x="{LABEL_W}" y="{}" width="{bar}" height="{}"/>"#,
            fill_for(*value),
            y + 2,
            ROW_H - 4
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{text}</text>"#, LABEL_W + BAR_W + 6, y + ROW_H - 6);
    }
    legend(&mut svg, LABEL_W, TOP + ROW_H * cells.len() as u32 + 10);
    svg.push_str("</svg>\n");

    let stem = format!("panel_{}", panel.subject_id);
    Ok(vec![
        write_file(out_dir, &format!("{stem}.csv"), &csv)?,
        write_file(out_dir, &format!("{stem}.svg"), &svg)?,
    ])
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::biovars::BioVar;
    use crate::report::heatmap::tests::cell_fills;

    fn panel(sv: Option<f64>) -> BioVariablePanel {
        let normalized: BTreeMap<BioVar, Option<f64>> = BioVar::ALL
            .iter()
            .enumerate()
            .map(|(k, &v)| (v, Some(k as f64 / 20.0)))
            .chain([(BioVar::Sv, sv)])
            .collect();
        BioVariablePanel {
            subject_id: "s07".into(),
            age: 33.0,
            fwhr: Some(1.9),
            testosterone_proxy: Some(0.4),
            bmi: 23.0,
            whtr: 0.47,
            ses: Some(0.6),
            circadian_disruption: Some(0.3),
            circulation: Some(0.7),
            metabolism: Some(0.5),
            inherent_ascvd: 0.2,
            high_friction: Some(0.4),
            heart_score: 0.6666,
            raw: normalized.clone(),
            normalized,
        }
    }

    #[test]
    fn full_panel() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_subject_panel(&panel(Some(0.9)), dir.path()).unwrap();
        assert_eq!(files[0].file_name().unwrap(), "panel_s07.csv");
        let csv = std::fs::read_to_string(&files[0]).unwrap();
        let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
        assert_eq!(header.len(), 2 + panel(None).cells().len());
        assert!(header.contains(&"Heart score") && header.contains(&"SV"));
        let svg = std::fs::read_to_string(&files[1]).unwrap();
        assert!(!cell_fills(&svg).iter().any(|f| f == super::super::HATCH_FILL));
    }

    #[test]
    fn missing_sv_is_hatched_and_empty() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_subject_panel(&panel(None), dir.path()).unwrap();
        let csv = std::fs::read_to_string(&files[0]).unwrap();
        let mut lines = csv.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        let k = header.iter().position(|h| *h == "SV").unwrap();
        assert_eq!(row[k], "");
        let fills = cell_fills(&std::fs::read_to_string(&files[1]).unwrap());
        assert_eq!(fills[k - 2], super::super::HATCH_FILL);
        assert_eq!(fills.iter().filter(|f| *f == super::super::HATCH_FILL).count(), 1);
    }

    #[test]
    fn deterministic() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let fa = emit_subject_panel(&panel(None), a.path()).unwrap();
        let fb = emit_subject_panel(&panel(None), b.path()).unwrap();
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
    }
}
