//! Static CSV + SVG renderings: per-subject panels, the cohort heat map and
//! an estimator comparison chart.
//!
//! Colors come from one linear ramp between a pale and a deep red, so a cell's
//! fill is a pure function of its [0, 1] value. Absent values are drawn with a
//! hatch pattern and written as empty CSV cells.

mod comparison;
mod heatmap;
mod panel;

use std::fmt::Write as _;
use std::path::Path;

pub use comparison::{emit_model_comparison, ComparisonRow};
pub use heatmap::{emit_cohort_heatmap, CohortSummary, SummaryRow};
pub use panel::emit_subject_panel;

use crate::error::{Error, Result};

/// Ramp endpoints: value 0 and value 1.
pub const RAMP_LOW: (u8, u8, u8) = (255, 245, 240);
pub const RAMP_HIGH: (u8, u8, u8) = (165, 15, 21);
pub const HATCH_FILL: &str = "url(#hatch)";

/// Fill for a [0, 1] value (clamped), or the hatch pattern when absent.
pub fn fill_for(value: Option<f64>) -> String {
    let Some(v) = value else { return HATCH_FILL.to_string() };
    let t = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    let mix = |a: u8, b: u8| (f64::from(a) + (f64::from(b) - f64::from(a)) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(RAMP_LOW.0, RAMP_HIGH.0),
        mix(RAMP_LOW.1, RAMP_HIGH.1),
        mix(RAMP_LOW.2, RAMP_HIGH.2)
    )
}

pub(crate) fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub(crate) fn svg_open(width: u32, height: u32) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    s.push_str(
        r##"<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)"><rect width="6" height="6" fill="#ffffff"/><line x1="0" y1="0" x2="0" y2="6" stroke="#999999" stroke-width="2"/></pattern></defs>"##,
    );
    s.push('\n');
    s
}

/// Color legend from 0 to 1 at `(x, y)`.
pub(crate) fn legend(s: &mut String, x: u32, y: u32) {
    let steps = 10;
    for i in 0..=steps {
        let v = f64::from(i) / f64::from(steps);
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{y}" width="12" height="10" fill="{}"/>"#,
            x + 12 * i,
            fill_for(Some(v))
        );
    }
    let _ = writeln!(s, r#"<text x="{x}" y="{}">0</text>"#, y + 22);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">1</text>"#, x + 12 * (steps + 1), y + 22);
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{y}" width="12" height="10" fill="{HATCH_FILL}"/><text x="{}" y="{}">absent</text>"#,
        x + 12 * (steps + 2),
        x + 12 * (steps + 3) + 4,
        y + 9
    );
}

pub(crate) fn write_file(out_dir: &Path, name: &str, contents: &str) -> Result<std::path::PathBuf> {
    let path = out_dir.join(name);
    crate::io::write_string(&path, contents)?;
    Ok(path)
}

pub(crate) fn csv_string(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints() {
        assert_eq!(fill_for(Some(0.0)), "#fff5f0");
        assert_eq!(fill_for(Some(1.0)), "#a50f15");
        assert_eq!(fill_for(Some(2.0)), fill_for(Some(1.0)));
        assert_eq!(fill_for(None), HATCH_FILL);
    }

    #[test]
    fn ramp_is_monotone_per_channel() {
        let rgb = |v: f64| {
            let f = fill_for(Some(v));
            (0..3)
                .map(|k| u8::from_str_radix(&f[1 + 2 * k..3 + 2 * k], 16).unwrap())
                .collect::<Vec<_>>()
        };
        for i in 0..100 {
            let (a, b) = (rgb(f64::from(i) / 100.0), rgb(f64::from(i + 1) / 100.0));
            assert!(a.iter().zip(&b).all(|(x, y)| y <= x));
        }
    }

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a<b & \"c\">"), "a&lt;b &amp; &quot;c&quot;&gt;");
    }
}
