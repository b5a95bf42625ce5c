use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::ols::LinearModel;
use crate::error::EstimatorError;
use crate::features::LoadWindow;

/// Reported VO2max values are clamped to this range.
pub const VO2MAX_RANGE: (f64, f64) = (10.0, 100.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Source {
    Time,
    Trimp,
    Vam,
    Combined,
}

impl Source {
    pub const SINGLE: [Source; 3] = [Source::Time, Source::Trimp, Source::Vam];
    pub const ALL: [Source; 4] = [Source::Time, Source::Trimp, Source::Vam, Source::Combined];

    pub fn name(self) -> &'static str {
        match self {
            Source::Time => "TIME",
            Source::Trimp => "TRIMP",
            Source::Vam => "VAM",
            Source::Combined => "COMBINED",
        }
    }

    pub fn parse(s: &str) -> Option<Source> {
        Source::ALL.into_iter().find(|x| x.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrfEstimate {
    pub date: NaiveDate,
    pub vo2max: f64,
    pub source: Source,
    pub contributing_weights: BTreeMap<Source, f64>,
}

impl CrfEstimate {
    pub fn single(date: NaiveDate, vo2max: f64, source: Source) -> Self {
        CrfEstimate {
            date,
            vo2max: vo2max.clamp(VO2MAX_RANGE.0, VO2MAX_RANGE.1),
            source,
            contributing_weights: BTreeMap::from([(source, 1.0)]),
        }
    }
}

/// Load feature fed to a TIME or TRIMP model.
pub fn load_feature(window: &LoadWindow, feature: Source) -> Option<f64> {
    match feature {
        Source::Time => Some(window.total_active_time),
        Source::Trimp => Some(window.total_trimp),
        _ => None,
    }
}

/// Applies a load model to one trailing window. `None` for a source that is
/// not load-based.
pub fn estimate_from_load(window: &LoadWindow, model: &LinearModel, feature: Source) -> Option<CrfEstimate> {
    let x = load_feature(window, feature)?;
    Some(CrfEstimate::single(window.end_date, model.predict(x), feature))
}

/// Inverse-training-error weighted mean.
///
/// A source with zero training error is a perfect fit; such sources share the
/// whole weight equally and a warning is logged.
pub fn combine_estimates(
    estimates: &[CrfEstimate],
    training_errors: &BTreeMap<Source, f64>,
) -> Result<CrfEstimate, EstimatorError> {
    let first = estimates
        .first()
        .ok_or_else(|| EstimatorError::Domain("no estimates to combine".into()))?;
    let mut errors: BTreeMap<Source, (f64, f64)> = BTreeMap::new();
    for e in estimates {
        if e.date != first.date {
            return Err(EstimatorError::Domain(format!("estimates for {} and {} mixed", first.date, e.date)));
        }
        let rmse = *training_errors
            .get(&e.source)
            .ok_or_else(|| EstimatorError::Domain(format!("no training error for {}", e.source)))?;
        if !(rmse >= 0.0) || !rmse.is_finite() {
            return Err(EstimatorError::Domain(format!("invalid training error {rmse} for {}", e.source)));
        }
        if errors.insert(e.source, (rmse, e.vo2max)).is_some() {
            return Err(EstimatorError::Domain(format!("two {} estimates to combine", e.source)));
        }
    }
    const PERFECT: f64 = 1e-12;
    let perfect = errors.values().filter(|&&(r, _)| r < PERFECT).count();
    if perfect > 0 {
        log::warn!("{perfect} source(s) with zero training error take all fusion weight");
    }
    let raw: Vec<f64> = errors
        .values()
        .map(|&(r, _)| match (perfect > 0, r < PERFECT) {
            (true, true) => 1.0,
            (true, false) => 0.0,
            (false, _) => 1.0 / r,
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    // The last weight absorbs the rounding residue, so summing the weights
    // in source order gives exactly 1.
    let last = weights.len() - 1;
    let head = weights[..last].iter().sum::<f64>();
    weights[last] = (1.0 - head).max(0.0);

    let lo = estimates.iter().map(|e| e.vo2max).fold(f64::INFINITY, f64::min);
    let hi = estimates.iter().map(|e| e.vo2max).fold(f64::NEG_INFINITY, f64::max);
    let value = errors.values().zip(&weights).map(|(&(_, v), w)| w * v).sum::<f64>();
    let contributing_weights: BTreeMap<Source, f64> = errors.keys().copied().zip(weights).collect();
    Ok(CrfEstimate {
        date: first.date,
        vo2max: value.clamp(lo, hi),
        source: Source::Combined,
        contributing_weights,
    })
}
