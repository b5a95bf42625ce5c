use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

/// Linear map from relative power (W/kg) to VO2max (mL/kg/min).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Conversion {
    pub slope: f64,
    pub intercept: f64,
}

impl Default for Conversion {
    fn default() -> Self {
        Conversion {
            slope: 10.8,
            intercept: 7.0,
        }
    }
}

impl Conversion {
    pub fn to_vo2max(&self, relative_power: f64) -> f64 {
        self.slope * relative_power + self.intercept
    }

    pub fn to_relative_power(&self, vo2max: f64) -> f64 {
        (vo2max - self.intercept) / self.slope
    }
}

/// VO2max from relative power with the default conversion.
pub fn power_to_vo2max(relative_power: f64) -> f64 {
    Conversion::default().to_vo2max(relative_power)
}

/// Default trailing span of the reference series, days.
pub const TRUTH_SPAN_DAYS: u32 = 42;

/// Trailing mean of dated values over `span_days` calendar days ending on each
/// date from the first to the last entry. Dates whose window holds no value
/// are omitted.
pub fn rolling_mean(series: &[(NaiveDate, f64)], span_days: u32) -> Vec<(NaiveDate, f64)> {
    let (Some(first), Some(last)) = (series.first(), series.last()) else {
        return Vec::new();
    };
    let span = i64::from(span_days.max(1));
    let mut out = Vec::new();
    let (mut lo, mut hi) = (0, 0);
    let mut date = first.0;
    while date <= last.0 {
        while hi < series.len() && series[hi].0 <= date {
            hi += 1;
        }
        while lo < hi && series[lo].0 <= date - Duration::days(span) {
            lo += 1;
        }
        if hi > lo {
            let window = &series[lo..hi];
            out.push((date, window.iter().map(|p| p.1).sum::<f64>() / window.len() as f64));
        }
        date += Duration::days(1);
    }
    out
}

/// Reference VO2max: the trailing mean of daily best 4-minute relative power,
/// converted. Days without a value are skipped; input must be date-sorted.
pub fn ground_truth_crf(daily_power: &[(NaiveDate, Option<f64>)], span_days: u32, conversion: &Conversion) -> Vec<(NaiveDate, f64)> {
    let present: Vec<(NaiveDate, f64)> = daily_power.iter().filter_map(|&(d, p)| p.map(|p| (d, p))).collect();
    rolling_mean(&present, span_days)
        .into_iter()
        .map(|(d, p)| (d, conversion.to_vo2max(p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(i: i64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2022, 3, 1).unwrap() + Duration::days(i)
    }

    #[test]
    fn conversion_examples() {
        assert!((power_to_vo2max(4.0) - 50.2).abs() < 1e-12);
        assert_eq!(power_to_vo2max(0.0), 7.0);
        assert!((power_to_vo2max(3.0) - power_to_vo2max(2.5) - 5.4).abs() < 1e-12);
        let c = Conversion::default();
        assert!((c.to_relative_power(c.to_vo2max(3.7)) - 3.7).abs() < 1e-12);
    }

    #[test]
    fn constant_power_gives_constant_truth() {
        let s: Vec<_> = (0..60).map(|i| (d(i), Some(4.0))).collect();
        let t = ground_truth_crf(&s, 42, &Conversion::default());
        assert_eq!(t.len(), 60);
        assert!(t.iter().all(|(_, v)| (v - 50.2).abs() < 1e-9));
    }

    #[test]
    fn step_fixture() {
        let s: Vec<_> = (0..42).map(|i| (d(i), Some(if i < 21 { 3.0 } else { 4.0 }))).collect();
        let t = ground_truth_crf(&s, 42, &Conversion::default());
        assert!((t[41].1 - 44.8).abs() < 1e-9);
    }

    #[test]
    fn single_day_and_gaps() {
        let s = vec![(d(0), Some(3.0)), (d(1), None), (d(50), Some(4.0))];
        let t = ground_truth_crf(&s, 42, &Conversion::default());
        assert!((t[0].1 - power_to_vo2max(3.0)).abs() < 1e-12);
        // Days 42..49 see nothing and are omitted; day 50 sees only itself.
        assert_eq!(t.len(), 43);
        assert!((t.last().unwrap().1 - 50.2).abs() < 1e-12);
    }
}
