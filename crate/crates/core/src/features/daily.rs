use chrono::{DateTime, Duration, NaiveDate, NaiveTime};
use serde::{Deserialize, Serialize};

use super::cardiac::{hr_drift, hr_recovery, CardiacOptions};
use super::load::{active_time, mechanical_work, trimp, TrimpParams};
use super::windows::{best_window_relative_power, window_features, WindowFeature, WindowOptions};
use crate::ingest::{ActivityStream, AthleteProfile};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureOptions {
    pub trimp: TrimpParams,
    pub windows: WindowOptions,
    pub cardiac: CardiacOptions,
}

/// Everything extracted from one activity.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityFeatures {
    pub date: NaiveDate,
    pub start_local: NaiveTime,
    /// First recorded (latitude, longitude), if the device logs position.
    pub start_position: Option<(f64, f64)>,
    pub active_time: f64,
    pub trimp: Option<f64>,
    pub work_kj: Option<f64>,
    pub best_4min_relative_power: Option<f64>,
    pub hr_recovery_60s: Option<f64>,
    pub hr_drift: Option<f64>,
    pub windows: Vec<WindowFeature>,
}

/// Local calendar date and clock time of a UTC timestamp for this athlete.
pub fn local_start(timestamp: i64, athlete: &AthleteProfile) -> (NaiveDate, NaiveTime) {
    let utc = DateTime::from_timestamp(timestamp, 0).unwrap_or_default().naive_utc();
    let offset = athlete.utc_offset_on(utc.date());
    let local = utc + Duration::seconds((offset * 3600.0).round() as i64);
    (local.date(), local.time())
}

pub fn activity_features(stream: &ActivityStream, athlete: &AthleteProfile, opts: &FeatureOptions) -> ActivityFeatures {
    let (date, start_local) = local_start(stream.start_time, athlete);
    let trimp = match trimp(stream, athlete, &opts.trimp) {
        Ok(v) => Some(v),
        Err(e) => {
            log::debug!("{} {}: trimp unavailable: {e}", stream.subject_id, stream.start_time);
            None
        }
    };
    ActivityFeatures {
        date,
        start_local,
        start_position: stream.samples.iter().find_map(|s| Some((s.latitude?, s.longitude?))),
        active_time: active_time(stream),
        trimp,
        work_kj: mechanical_work(stream),
        best_4min_relative_power: best_window_relative_power(stream, athlete.body_mass, opts.windows.length_s),
        hr_recovery_60s: hr_recovery(stream, &opts.cardiac),
        hr_drift: hr_drift(stream, &opts.cardiac),
        windows: window_features(stream, athlete, &opts.windows),
    }
}

/// Features of one calendar day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyFeatures {
    pub date: NaiveDate,
    /// Seconds.
    pub active_time: f64,
    pub trimp: Option<f64>,
    /// W/kg
    pub best_4min_relative_power: Option<f64>,
    pub work_kj: Option<f64>,
    /// beats/min
    pub hr_recovery_60s: Option<f64>,
    /// percent per hour
    pub hr_drift: Option<f64>,
    pub exercise_start_time: Option<NaiveTime>,
    pub n_activities: u32,
}

impl DailyFeatures {
    /// Combines the activities of one day: loads add, the best effort is the
    /// maximum, cardiac markers average, and the start time is the earliest.
    pub fn aggregate(date: NaiveDate, activities: &[&ActivityFeatures]) -> DailyFeatures {
        let sum = |f: &dyn Fn(&ActivityFeatures) -> Option<f64>| {
            activities.iter().filter_map(|a| f(a)).reduce(|a, b| a + b)
        };
        let mean = |f: &dyn Fn(&ActivityFeatures) -> Option<f64>| {
            let v: Vec<f64> = activities.iter().filter_map(|a| f(a)).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        DailyFeatures {
            date,
            active_time: activities.iter().map(|a| a.active_time).sum(),
            trimp: sum(&|a| a.trimp),
            best_4min_relative_power: activities
                .iter()
                .filter_map(|a| a.best_4min_relative_power)
                .reduce(f64::max),
            work_kj: sum(&|a| a.work_kj),
            hr_recovery_60s: mean(&|a| a.hr_recovery_60s),
            hr_drift: mean(&|a| a.hr_drift),
            exercise_start_time: activities.iter().map(|a| a.start_local).min(),
            n_activities: activities.len() as u32,
        }
    }
}

/// A 4-minute window tagged with the day and activity it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatedWindow {
    pub date: NaiveDate,
    pub activity: u32,
    pub window: WindowFeature,
}

/// Feature tables for one subject.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubjectFeatures {
    pub subject_id: String,
    /// Sorted by date, one entry per day with at least one activity.
    pub daily: Vec<DailyFeatures>,
    pub windows: Vec<DatedWindow>,
}

impl SubjectFeatures {
    /// Builds the tables from per-activity features in any order. Activities
    /// are numbered in chronological order.
    pub fn from_activities(subject_id: impl Into<String>, mut activities: Vec<ActivityFeatures>) -> Self {
        activities.sort_by_key(|a| (a.date, a.start_local));
        let mut daily = Vec::new();
        let mut windows = Vec::new();
        for (i, a) in activities.iter().enumerate() {
            windows.extend(a.windows.iter().map(|w| DatedWindow {
                date: a.date,
                activity: i as u32,
                window: *w,
            }));
        }
        for group in activities.chunk_by(|a, b| a.date == b.date) {
            let refs: Vec<&ActivityFeatures> = group.iter().collect();
            daily.push(DailyFeatures::aggregate(group[0].date, &refs));
        }
        SubjectFeatures {
            subject_id: subject_id.into(),
            daily,
            windows,
        }
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.daily.first().map(|d| d.date)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.daily.last().map(|d| d.date)
    }
}
