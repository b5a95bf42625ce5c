use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::EstimatorError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub rmse: f64,
    pub r2: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub rmse: f64,
    pub r2: f64,
    pub n: usize,
    pub per_subject: BTreeMap<String, ErrorStats>,
}

/// Root mean square error and coefficient of determination over paired
/// values. A constant truth gives r² 1 for a perfect prediction and 0
/// otherwise.
pub fn error_stats(pairs: &[(f64, f64)]) -> Option<ErrorStats> {
    if pairs.is_empty() {
        return None;
    }
    let n = pairs.len() as f64;
    let mean = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (ss_res, ss_tot) = pairs
        .iter()
        .fold((0.0, 0.0), |(r, t), &(p, y)| (r + (y - p) * (y - p), t + (y - mean) * (y - mean)));
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    Some(ErrorStats {
        rmse: (ss_res / n).sqrt(),
        r2,
        n: pairs.len(),
    })
}

/// Mean with a normal-approximation 95% interval; the interval needs at
/// least two values.
pub fn mean_ci95(values: &[f64]) -> Option<(f64, Option<(f64, f64)>)> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Some((mean, None));
    }
    let sd = (values.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let half = 1.96 * sd / (n as f64).sqrt();
    Some((mean, Some((mean - half, mean + half))))
}

/// (prediction, truth) pairs on the dates both series share.
pub fn align(predictions: &[(NaiveDate, f64)], truth: &[(NaiveDate, f64)]) -> Vec<(f64, f64)> {
    let truth: BTreeMap<NaiveDate, f64> = truth.iter().copied().collect();
    predictions
        .iter()
        .filter_map(|(d, p)| truth.get(d).map(|t| (*p, *t)))
        .collect()
}

pub fn evaluate(predictions: &[(NaiveDate, f64)], truth: &[(NaiveDate, f64)]) -> Result<EvalReport, EstimatorError> {
    let pairs = align(predictions, truth);
    let s = error_stats(&pairs).ok_or(EstimatorError::EmptyOverlap)?;
    Ok(EvalReport {
        rmse: s.rmse,
        r2: s.r2,
        n: s.n,
        per_subject: BTreeMap::new(),
    })
}

/// Pools per-subject (prediction, truth) pairs into one report with a
/// per-subject breakdown.
pub fn evaluate_cohort(pairs: &BTreeMap<String, Vec<(f64, f64)>>) -> Result<EvalReport, EstimatorError> {
    let all: Vec<(f64, f64)> = pairs.values().flatten().copied().collect();
    let s = error_stats(&all).ok_or(EstimatorError::EmptyOverlap)?;
    Ok(EvalReport {
        rmse: s.rmse,
        r2: s.r2,
        n: s.n,
        per_subject: pairs
            .iter()
            .filter_map(|(k, v)| error_stats(v).map(|s| (k.clone(), s)))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: &[f64]) -> Vec<(NaiveDate, f64)> {
        let d0 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        v.iter()
            .enumerate()
            .map(|(i, &x)| (d0 + chrono::Duration::days(i as i64), x))
            .collect()
    }

    #[test]
    fn perfect_prediction() {
        let t = series(&[40.0, 45.0, 50.0]);
        let r = evaluate(&t, &t).unwrap();
        assert_eq!((r.rmse, r.r2, r.n), (0.0, 1.0, 3));
    }

    #[test]
    fn mean_prediction_has_zero_r2() {
        let r = evaluate(&series(&[2.0, 2.0, 2.0]), &series(&[1.0, 2.0, 3.0])).unwrap();
        assert!(r.r2.abs() < 1e-12);
    }

    #[test]
    fn uniform_offset() {
        let r = evaluate(&series(&[2.0, 3.0, 4.0]), &series(&[1.0, 2.0, 3.0])).unwrap();
        assert!((r.rmse - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_overlap() {
        let p = series(&[1.0]);
        let t: Vec<_> = series(&[0.0, 1.0])[1..].to_vec();
        assert!(matches!(evaluate(&p, &t), Err(EstimatorError::EmptyOverlap)));
    }
}
