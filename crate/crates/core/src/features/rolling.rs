use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::daily::DailyFeatures;

/// Trailing-window totals ending on `end_date`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadWindow {
    pub end_date: NaiveDate,
    pub span_days: u32,
    pub total_trimp: f64,
    /// Seconds.
    pub total_active_time: f64,
    pub total_work_kj: f64,
    /// Mean of the daily best 4-minute relative power over days that have one.
    pub best_4min_relative_power: Option<f64>,
    /// Days in the window with any recorded activity.
    pub active_days: u32,
}

/// One window per calendar day from the first to the last daily entry, each
/// covering the `span_days` days ending on (and including) that date. Days
/// without an entry contribute nothing.
///
/// Sums are accumulated oldest-first so the result is reproducible by a plain
/// re-sum in date order.
pub fn rolling_aggregate(daily: &[DailyFeatures], span_days: u32) -> Vec<LoadWindow> {
    let (Some(first), Some(last)) = (daily.first(), daily.last()) else {
        return Vec::new();
    };
    debug_assert!(daily.windows(2).all(|w| w[0].date < w[1].date), "daily must be sorted");
    let span_days = span_days.max(1);
    let mut out = Vec::new();
    let mut lo = 0;
    let mut hi = 0;
    let mut date = first.date;
    while date <= last.date {
        let earliest = date - Duration::days(i64::from(span_days) - 1);
        while hi < daily.len() && daily[hi].date <= date {
            hi += 1;
        }
        while lo < hi && daily[lo].date < earliest {
            lo += 1;
        }
        out.push(window_over(date, span_days, &daily[lo..hi]));
        date += Duration::days(1);
    }
    out
}

fn window_over(end_date: NaiveDate, span_days: u32, days: &[DailyFeatures]) -> LoadWindow {
    let mut w = LoadWindow {
        end_date,
        span_days,
        total_trimp: 0.0,
        total_active_time: 0.0,
        total_work_kj: 0.0,
        best_4min_relative_power: None,
        active_days: days.len() as u32,
    };
    let mut best_sum = 0.0;
    let mut best_n = 0usize;
    for d in days {
        w.total_trimp += d.trimp.unwrap_or(0.0);
        w.total_active_time += d.active_time;
        w.total_work_kj += d.work_kj.unwrap_or(0.0);
        if let Some(b) = d.best_4min_relative_power {
            best_sum += b;
            best_n += 1;
        }
    }
    if best_n > 0 {
        w.best_4min_relative_power = Some(best_sum / best_n as f64);
    }
    w
}
