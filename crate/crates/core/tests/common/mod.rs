//! Generators shared by the property suites and the acceptance harness.
#![allow(dead_code)]

use cardioflux::biovars::{BioVar, RawBioVariables};
use cardioflux::features::{DailyFeatures, LoadWindow};
use cardioflux::ingest::{ActivityStream, SensorSample};
use chrono::{Duration, NaiveDate};
use proptest::prelude::*;

/// Values that survive a decimal round trip only if the writer is exact.
pub fn awkward(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi).prop_map(|v| v * (1.0 + f64::EPSILON))
}

pub fn sample_at(t: i64, full: bool) -> impl Strategy<Value = SensorSample> {
    let opt = move |s: BoxedStrategy<f64>| {
        if full {
            s.prop_map(Some).boxed()
        } else {
            proptest::option::weighted(0.8, s).boxed()
        }
    };
    (
        opt(awkward(0.0, 1500.0).boxed()),
        opt(awkward(40.0, 200.0).boxed()),
        opt(awkward(0.0, 120.0).boxed()),
        opt(awkward(-60.0, 60.0).boxed()),
        opt(awkward(-170.0, 170.0).boxed()),
        opt(awkward(-50.0, 3000.0).boxed()),
        opt(awkward(0.0, 20.0).boxed()),
    )
        .prop_map(move |(power, heart_rate, cadence, latitude, longitude, altitude, speed)| SensorSample {
            timestamp: t,
            power,
            heart_rate,
            cadence,
            latitude,
            longitude,
            altitude,
            speed,
        })
}

/// Strictly increasing timestamps with occasional short and long gaps.
pub fn stream(max_len: usize, full: bool) -> impl Strategy<Value = ActivityStream> {
    prop::collection::vec(prop_oneof![8 => Just(1i64), 2 => 2i64..5, 1 => 6i64..40], 1..max_len)
        .prop_flat_map(move |steps| {
            let mut t = 1_600_000_000;
            let samples: Vec<_> = steps
                .iter()
                .map(|s| {
                    t += s;
                    sample_at(t, full)
                })
                .collect();
            samples
        })
        .prop_map(|samples| ActivityStream::new("p", 8, samples).unwrap())
}

pub fn daily_list() -> impl Strategy<Value = Vec<DailyFeatures>> {
    prop::collection::btree_set(0i64..90, 1..40).prop_flat_map(|days| {
        let days: Vec<i64> = days.into_iter().collect();
        let n = days.len();
        (
            Just(days),
            prop::collection::vec(
                (
                    0.0..20_000.0f64,
                    proptest::option::of(0.0..400.0f64),
                    proptest::option::of(0.0..3000.0f64),
                    proptest::option::of(1.0..7.0f64),
                ),
                n,
            ),
        )
    })
    .prop_map(|(days, vals)| {
        let base = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
        days.iter()
            .zip(vals)
            .map(|(&d, (active, trimp, work, best))| DailyFeatures {
                date: base + Duration::days(d),
                active_time: active,
                trimp,
                best_4min_relative_power: best,
                work_kj: work,
                hr_recovery_60s: None,
                hr_drift: None,
                exercise_start_time: None,
                n_activities: 1,
            })
            .collect()
    })
}

/// Independent re-sum over the raw list, oldest first.
pub fn brute_force(daily: &[DailyFeatures], end: NaiveDate, span: u32) -> LoadWindow {
    let from = end - Duration::days(i64::from(span) - 1);
    let days: Vec<&DailyFeatures> = daily.iter().filter(|d| d.date >= from && d.date <= end).collect();
    let best: Vec<f64> = days.iter().filter_map(|d| d.best_4min_relative_power).collect();
    LoadWindow {
        end_date: end,
        span_days: span,
        total_trimp: days.iter().fold(0.0, |s, d| s + d.trimp.unwrap_or(0.0)),
        total_active_time: days.iter().fold(0.0, |s, d| s + d.active_time),
        total_work_kj: days.iter().fold(0.0, |s, d| s + d.work_kj.unwrap_or(0.0)),
        best_4min_relative_power: (!best.is_empty()).then(|| best.iter().sum::<f64>() / best.len() as f64),
        active_days: days.len() as u32,
    }
}

pub const ETHNICITIES: [&str; 5] = ["white", "black", "hispanic", "asian", "other"];

pub fn raw_subject(index: usize) -> impl Strategy<Value = RawBioVariables> {
    let values = prop::collection::vec(prop::option::weighted(0.9, 0.0..500.0f64), BioVar::ALL.len());
    (values, 18.0..85.0f64, 0..ETHNICITIES.len(), any::<bool>(), 1u8..=7, 1u8..=9).prop_map(
        move |(values, age, eth, smoker, education_level, occupation_level)| RawBioVariables {
            subject_id: format!("s{index:02}"),
            age,
            ethnicity: ETHNICITIES[eth].into(),
            smoker,
            education_level,
            occupation_level,
            anthropometric_flag: false,
            values: BioVar::ALL.into_iter().zip(values).collect(),
        },
    )
}

pub fn raw_cohort() -> impl Strategy<Value = Vec<RawBioVariables>> {
    (3usize..16).prop_flat_map(|n| (0..n).map(raw_subject).collect::<Vec<_>>())
}

pub fn pairs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 2..200)
        .prop_filter("inputs must vary", |p| p.iter().any(|q| q.0 != p[0].0))
}
