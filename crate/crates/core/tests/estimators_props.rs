mod common;

use std::collections::BTreeMap;

use cardioflux::estimators::{
    combine_estimates, fit_ols, ground_truth_crf, rolling_mean, select_vam_model, Conversion, CrfEstimate,
    LinearModel, Source, VamModelBank,
};
use chrono::{Duration, NaiveDate};
use proptest::prelude::*;

fn model(slope: f64) -> LinearModel {
    LinearModel {
        slope,
        intercept: 0.0,
        training_rmse: 0.1,
        training_r2: 0.9,
        n_train: 100,
    }
}

fn date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2022, 6, 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn ols_residuals_are_orthogonal(p in common::pairs()) {
        let m = fit_ols(&p).unwrap();
        let r: Vec<f64> = p.iter().map(|&(x, y)| y - m.predict(x)).collect();
        let scale_1: f64 = p.iter().map(|q| q.1.abs()).sum::<f64>().max(1.0);
        let scale_x: f64 = p.iter().map(|q| (q.0 * q.1).abs()).sum::<f64>().max(1.0);
        let sum_r: f64 = r.iter().sum();
        let sum_rx: f64 = r.iter().zip(&p).map(|(e, q)| e * q.0).sum();
        prop_assert!(sum_r.abs() <= 1e-9 * scale_1, "sum r = {sum_r}");
        prop_assert!(sum_rx.abs() <= 1e-9 * scale_x, "sum r x = {sum_rx}");
    }

    #[test]
    fn fusion_is_bounded_and_weights_sum_to_one(
        values in prop::collection::vec(10.0..100.0f64, 1..=3),
        errors in prop::collection::vec(prop_oneof![9 => 0.01..10.0f64, 1 => Just(0.0)], 3),
    ) {
        let sources = [Source::Time, Source::Trimp, Source::Vam];
        let estimates: Vec<CrfEstimate> =
            values.iter().zip(sources).map(|(&v, s)| CrfEstimate::single(date(), v, s)).collect();
        let training: BTreeMap<Source, f64> = sources.into_iter().zip(errors).collect();
        let fused = combine_estimates(&estimates, &training).unwrap();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(fused.vo2max >= lo && fused.vo2max <= hi);
        prop_assert_eq!(fused.contributing_weights.values().sum::<f64>(), 1.0);
        prop_assert!(fused.contributing_weights.values().all(|&w| w >= 0.0));
    }

    #[test]
    fn vam_model_selection_is_monotone(top in 0u8..=9, a in -5.0..20.0f64, b in -5.0..20.0f64) {
        let bank = VamModelBank { models: (0..=top).map(|t| (t, model(f64::from(t)))).collect() };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(select_vam_model(&bank, lo).slope <= select_vam_model(&bank, hi).slope);
    }

    #[test]
    fn truth_commutes_with_conversion(
        values in prop::collection::vec(proptest::option::of(1.0..7.0f64), 1..120),
        span in 1u32..60,
    ) {
        let conv = Conversion::default();
        let series: Vec<(NaiveDate, Option<f64>)> =
            values.iter().enumerate().map(|(i, &v)| (date() + Duration::days(i as i64), v)).collect();
        let truth = ground_truth_crf(&series, span, &conv);
        let converted: Vec<(NaiveDate, f64)> =
            series.iter().filter_map(|&(d, v)| v.map(|v| (d, conv.to_vo2max(v)))).collect();
        let expected = rolling_mean(&converted, span);
        prop_assert_eq!(truth.len(), expected.len());
        for (a, b) in truth.iter().zip(&expected) {
            prop_assert_eq!(a.0, b.0);
            prop_assert!((a.1 - b.1).abs() <= 1e-9 * b.1.abs());
        }
    }
}

#[test]
fn worked_example_selects_threshold_five() {
    let bank = VamModelBank { models: (0..=9).map(|t| (t, model(f64::from(t)))).collect() };
    assert_eq!(select_vam_model(&bank, 5.3), &bank.models[&5]);
}
