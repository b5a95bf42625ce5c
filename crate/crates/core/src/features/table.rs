//! CSV tables for daily features, 4-minute windows and load windows.
//!
//! Empty cells mean "not computable". Dates are ISO `YYYY-MM-DD`, clock
//! times `HH:MM:SS`.

use std::io::{Read, Write};

use chrono::{NaiveDate, NaiveTime};

use super::{DailyFeatures, DatedWindow, LoadWindow, WindowFeature};
use crate::error::{Error, Result};
use crate::io::{opt_cell, parse_opt};

pub const DAILY_HEADER: [&str; 9] = [
    "date",
    "active_time_s",
    "trimp",
    "best_4min_rel_power_wkg",
    "work_kj",
    "hrr60_bpm",
    "hr_drift_pct_per_h",
    "start_time_local",
    "n_activities",
];

pub const WINDOW_HEADER: [&str; 8] = [
    "date",
    "activity",
    "window_start",
    "duration_s",
    "mean_rel_power_wkg",
    "vam_m_per_h",
    "max_slope_pct",
    "mean_hr_bpm",
];

pub const LOAD_HEADER: [&str; 7] = [
    "end_date",
    "span_days",
    "total_trimp",
    "total_active_time_s",
    "total_work_kj",
    "best_4min_rel_power_wkg",
    "active_days",
];

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

fn io_err(e: std::io::Error) -> Error {
    Error::Config(format!("csv write: {e}"))
}

pub fn write_daily<W: Write>(rows: &[DailyFeatures], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(DAILY_HEADER).map_err(csv_err)?;
    for d in rows {
        w.write_record([
            d.date.to_string(),
            d.active_time.to_string(),
            opt_cell(d.trimp),
            opt_cell(d.best_4min_relative_power),
            opt_cell(d.work_kj),
            opt_cell(d.hr_recovery_60s),
            opt_cell(d.hr_drift),
            d.exercise_start_time.map(|t| t.format("%H:%M:%S").to_string()).unwrap_or_default(),
            d.n_activities.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_daily<R: Read>(reader: R) -> Result<Vec<DailyFeatures>> {
    let mut r = csv::Reader::from_reader(reader);
    check_header(r.headers().map_err(csv_err)?, &DAILY_HEADER)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |field: &str| Error::Config(format!("daily features line {line}: bad {field}"));
        out.push(DailyFeatures {
            date: parse_date(&rec[0]).ok_or_else(|| bad("date"))?,
            active_time: rec[1].parse().map_err(|_| bad("active_time_s"))?,
            trimp: parse_opt(&rec[2]).map_err(|_| bad("trimp"))?,
            best_4min_relative_power: parse_opt(&rec[3]).map_err(|_| bad("best_4min_rel_power_wkg"))?,
            work_kj: parse_opt(&rec[4]).map_err(|_| bad("work_kj"))?,
            hr_recovery_60s: parse_opt(&rec[5]).map_err(|_| bad("hrr60_bpm"))?,
            hr_drift: parse_opt(&rec[6]).map_err(|_| bad("hr_drift_pct_per_h"))?,
            exercise_start_time: if rec[7].is_empty() {
                None
            } else {
                Some(NaiveTime::parse_from_str(&rec[7], "%H:%M:%S").map_err(|_| bad("start_time_local"))?)
            },
            n_activities: rec[8].parse().map_err(|_| bad("n_activities"))?,
        });
    }
    Ok(out)
}

pub fn write_windows<W: Write>(rows: &[DatedWindow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(WINDOW_HEADER).map_err(csv_err)?;
    for d in rows {
        let x = &d.window;
        w.write_record([
            d.date.to_string(),
            d.activity.to_string(),
            x.window_start.to_string(),
            x.duration_s.to_string(),
            opt_cell(x.mean_relative_power),
            opt_cell(x.vam),
            x.max_slope.to_string(),
            opt_cell(x.mean_hr),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_windows<R: Read>(reader: R) -> Result<Vec<DatedWindow>> {
    let mut r = csv::Reader::from_reader(reader);
    check_header(r.headers().map_err(csv_err)?, &WINDOW_HEADER)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |field: &str| Error::Config(format!("windows line {line}: bad {field}"));
        out.push(DatedWindow {
            date: parse_date(&rec[0]).ok_or_else(|| bad("date"))?,
            activity: rec[1].parse().map_err(|_| bad("activity"))?,
            window: WindowFeature {
                window_start: rec[2].parse().map_err(|_| bad("window_start"))?,
                duration_s: rec[3].parse().map_err(|_| bad("duration_s"))?,
                mean_relative_power: parse_opt(&rec[4]).map_err(|_| bad("mean_rel_power_wkg"))?,
                vam: parse_opt(&rec[5]).map_err(|_| bad("vam_m_per_h"))?,
                max_slope: rec[6].parse().map_err(|_| bad("max_slope_pct"))?,
                mean_hr: parse_opt(&rec[7]).map_err(|_| bad("mean_hr_bpm"))?,
            },
        });
    }
    Ok(out)
}

pub fn write_load_windows<W: Write>(rows: &[LoadWindow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(LOAD_HEADER).map_err(csv_err)?;
    for l in rows {
        w.write_record([
            l.end_date.to_string(),
            l.span_days.to_string(),
            l.total_trimp.to_string(),
            l.total_active_time.to_string(),
            l.total_work_kj.to_string(),
            opt_cell(l.best_4min_relative_power),
            l.active_days.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

pub(crate) fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

pub(crate) fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::Config(format!(
            "unexpected header `{}`, expected `{}`",
            found.iter().collect::<Vec<_>>().join(","),
            expected.join(",")
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn daily_round_trip() {
        let rows = vec![DailyFeatures {
            date: NaiveDate::from_ymd_opt(2020, 2, 3).unwrap(),
            active_time: 3540.0,
            trimp: Some(81.25),
            best_4min_relative_power: Some(4.125),
            work_kj: None,
            hr_recovery_60s: Some(31.5),
            hr_drift: Some(-2.25),
            exercise_start_time: NaiveTime::from_hms_opt(6, 45, 10),
            n_activities: 1,
        }];
        let mut buf = Vec::new();
        write_daily(&rows, &mut buf).unwrap();
        assert_eq!(read_daily(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn windows_round_trip() {
        let rows = vec![DatedWindow {
            date: NaiveDate::from_ymd_opt(2020, 2, 3).unwrap(),
            activity: 4,
            window: WindowFeature {
                window_start: 1_580_700_000,
                duration_s: 240,
                mean_relative_power: Some(3.3),
                vam: None,
                max_slope: -1.5,
                mean_hr: Some(150.0),
            },
        }];
        let mut buf = Vec::new();
        write_windows(&rows, &mut buf).unwrap();
        assert_eq!(read_windows(buf.as_slice()).unwrap(), rows);
    }
}
