//! Cohort normalization and the summary scores. Every score is an
//! equal-weight mean of [0, 1] components, so it stays in [0, 1].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::BioVarError;

/// Plausible adult ranges; values outside raise the sanity flag.
pub const BMI_RANGE: (f64, f64) = (12.0, 60.0);
pub const WHTR_RANGE: (f64, f64) = (0.25, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anthropometrics {
    /// kg/m²
    pub bmi: f64,
    /// Waist over height, reported as "WHR".
    pub whtr: f64,
    /// Set when either value falls outside its plausible range.
    pub sanity_flag: bool,
}

pub fn anthropometrics(height_cm: f64, weight_kg: f64, waist_cm: f64) -> Result<Anthropometrics, BioVarError> {
    for (name, v) in [("height", height_cm), ("weight", weight_kg), ("waist", waist_cm)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(BioVarError::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    let m = height_cm / 100.0;
    let bmi = weight_kg / (m * m);
    let whtr = waist_cm / height_cm;
    let outside = |v: f64, (lo, hi): (f64, f64)| v < lo || v > hi;
    let sanity_flag = outside(bmi, BMI_RANGE) || outside(whtr, WHTR_RANGE);
    if sanity_flag {
        log::warn!("implausible anthropometrics: bmi {bmi:.2}, whtr {whtr:.3}");
    }
    Ok(Anthropometrics { bmi, whtr, sanity_flag })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub values: Vec<f64>,
    /// All inputs were equal, so every output is 0.5.
    pub degenerate: bool,
}

/// Min-max maps `values` onto [0, 1] across the cohort; with `flip`, the
/// lowest raw value maps to 1 instead.
pub fn cohort_normalize(values: &[f64], flip: bool) -> Result<Normalized, BioVarError> {
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(BioVarError::Domain(format!("cannot normalize non-finite value {v}")));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() || lo == hi {
        if !values.is_empty() {
            log::warn!("all {} values equal {lo}; normalizing to 0.5", values.len());
        }
        return Ok(Normalized {
            values: vec![0.5; values.len()],
            degenerate: !values.is_empty(),
        });
    }
    let values = values
        .iter()
        .map(|v| {
            let x = (v - lo) / (hi - lo);
            if flip {
                1.0 - x
            } else {
                x
            }
        })
        .collect();
    Ok(Normalized {
        values,
        degenerate: false,
    })
}

/// [`cohort_normalize`] over the present values; absent stay absent.
pub fn normalize_present(values: &[Option<f64>], flip: bool) -> Result<Vec<Option<f64>>, BioVarError> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let mut normalized = cohort_normalize(&present, flip)?.values.into_iter();
    Ok(values.iter().map(|v| v.and_then(|_| normalized.next())).collect())
}

/// Mean of the present components, or `None` when none are.
pub fn mean_present(components: &[Option<f64>]) -> Option<f64> {
    let present: Vec<f64> = components.iter().flatten().copied().collect();
    (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Light pollution, time-zone change and start-time variability, each
/// already cohort-normalized.
pub fn circadian_disruption(light_norm: f64, tz_change_norm: f64, start_variability_norm: f64) -> f64 {
    mean(&[light_norm, tz_change_norm, start_variability_norm])
}

pub fn circulation_score(crf: f64, hrr: f64, sv: f64, trimp: f64) -> f64 {
    mean(&[crf, hrr, sv, trimp])
}

/// Inputs are health-polarized: BMI, WHtR and HRD arrive flipped.
pub fn metabolism_score(work_kj: f64, hrd: f64, active_time: f64, bmi: f64, whtr: f64) -> f64 {
    mean(&[work_kj, hrd, active_time, bmi, whtr])
}

/// Inputs are risk-polarized: education and income arrive flipped.
pub fn high_friction_risk(education: f64, income: f64, crime: f64, cardiac_death: f64, air: f64, noise: f64, light: f64) -> f64 {
    mean(&[education, income, crime, cardiac_death, air, noise, light])
}

/// Weights of the inherent ASCVD composite: a logistic of
/// `intercept + age_per_year·(age − age_reference) + smoking·smoker
/// + testosterone·proxy + ethnicity offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AscvdWeights {
    pub intercept: f64,
    pub age_reference: f64,
    pub age_per_year: f64,
    pub smoking: f64,
    pub testosterone: f64,
    /// Offsets by lower-case ethnicity label; unknown labels get zero.
    pub ethnicity: BTreeMap<String, f64>,
}

impl Default for AscvdWeights {
    fn default() -> Self {
        AscvdWeights {
            intercept: 0.0,
            age_reference: 40.0,
            age_per_year: 0.08,
            smoking: 0.7,
            testosterone: -1.0,
            ethnicity: [("white", 0.0), ("black", 0.3), ("hispanic", -0.1), ("asian", -0.2), ("other", 0.0)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        }
    }
}

impl AscvdWeights {
    pub fn zero() -> Self {
        AscvdWeights {
            intercept: 0.0,
            age_reference: 0.0,
            age_per_year: 0.0,
            smoking: 0.0,
            testosterone: 0.0,
            ethnicity: BTreeMap::new(),
        }
    }
}

pub const MIN_ADULT_AGE: f64 = 18.0;

/// Relative inherent risk in [0, 1]; not a calibrated event probability.
pub fn inherent_ascvd(
    age: f64,
    ethnicity: &str,
    testosterone_proxy: f64,
    smoker: bool,
    weights: &AscvdWeights,
) -> Result<f64, BioVarError> {
    if !(age >= MIN_ADULT_AGE) {
        return Err(BioVarError::Domain(format!("age {age} below {MIN_ADULT_AGE}")));
    }
    if !(0.0..=1.0).contains(&testosterone_proxy) {
        return Err(BioVarError::Domain(format!(
            "testosterone proxy {testosterone_proxy} outside [0, 1]"
        )));
    }
    let key = ethnicity.trim().to_lowercase();
    let offset = weights.ethnicity.get(&key).copied().unwrap_or_else(|| {
        if !weights.ethnicity.is_empty() {
            log::warn!("unknown ethnicity `{ethnicity}`; using a neutral offset");
        }
        0.0
    });
    let z = weights.intercept
        + weights.age_per_year * (age - weights.age_reference)
        + weights.smoking * f64::from(u8::from(smoker))
        + weights.testosterone * testosterone_proxy
        + offset;
    Ok(1.0 / (1.0 + (-z).exp()))
}

/// Equal-weight mean of circulation, metabolism and `1 − risk`.
pub fn heart_score(circulation: f64, metabolism: f64, inherent_ascvd: f64) -> f64 {
    mean(&[circulation, metabolism, 1.0 - inherent_ascvd])
}

/// Component weights of the heart score. Circadian disruption enters as
/// `1 − disruption` and is off by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeartWeights {
    pub circulation: f64,
    pub metabolism: f64,
    pub ascvd: f64,
    pub circadian: f64,
}

impl Default for HeartWeights {
    fn default() -> Self {
        HeartWeights {
            circulation: 1.0,
            metabolism: 1.0,
            ascvd: 1.0,
            circadian: 0.0,
        }
    }
}

impl HeartWeights {
    /// Weighted mean over the present components with positive weight.
    pub fn score(
        &self,
        circulation: Option<f64>,
        metabolism: Option<f64>,
        inherent_ascvd: f64,
        circadian_disruption: Option<f64>,
    ) -> Option<f64> {
        let parts = [
            (self.circulation, circulation),
            (self.metabolism, metabolism),
            (self.ascvd, Some(1.0 - inherent_ascvd)),
            (self.circadian, circadian_disruption.map(|c| 1.0 - c)),
        ];
        let (num, den) = parts
            .iter()
            .filter_map(|&(w, v)| Some((w, v?)))
            .filter(|&(w, _)| w > 0.0)
            .fold((0.0, 0.0), |(n, d), (w, v)| (n + w * v, d + w));
        (den > 0.0).then(|| num / den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anthropometric_cases() {
        let a = anthropometrics(175.0, 70.0, 80.0).unwrap();
        assert!((a.bmi - 22.857).abs() < 1e-3, "{}", a.bmi);
        assert!((a.whtr - 0.457).abs() < 1e-3);
        assert!(!a.sanity_flag);
        let b = anthropometrics(100.0, 100.0, 50.0).unwrap();
        assert_eq!(b.bmi, 100.0);
        assert!(b.sanity_flag);
        assert_eq!(anthropometrics(180.0, 80.0, 180.0).unwrap().whtr, 1.0);
        assert!(anthropometrics(0.0, 80.0, 80.0).is_err());
        assert!(anthropometrics(170.0, -1.0, 80.0).is_err());
    }

    #[test]
    fn normalize_cases() {
        assert_eq!(cohort_normalize(&[2.0, 4.0, 6.0], false).unwrap().values, vec![0.0, 0.5, 1.0]);
        assert_eq!(cohort_normalize(&[2.0, 4.0, 6.0], true).unwrap().values, vec![1.0, 0.5, 0.0]);
        let flat = cohort_normalize(&[5.0, 5.0, 5.0], false).unwrap();
        assert_eq!(flat.values, vec![0.5; 3]);
        assert!(flat.degenerate);
        assert!(cohort_normalize(&[1.0, f64::NAN], false).is_err());
        assert_eq!(
            normalize_present(&[Some(1.0), None, Some(3.0)], false).unwrap(),
            vec![Some(0.0), None, Some(1.0)]
        );
    }

    #[test]
    fn summary_means() {
        assert!((circadian_disruption(0.2, 0.4, 0.6) - 0.4).abs() < 1e-12);
        assert_eq!(circadian_disruption(0.0, 0.0, 0.0), 0.0);
        assert_eq!(circadian_disruption(1.0, 1.0, 1.0), 1.0);
        assert_eq!(circulation_score(1.0, 1.0, 1.0, 1.0), 1.0);
        assert!((circulation_score(0.8, 0.6, 0.4, 0.2) - 0.5).abs() < 1e-12);
        assert!((circulation_score(0.2, 0.4, 0.6, 0.8) - circulation_score(0.8, 0.6, 0.4, 0.2)).abs() < 1e-15);
        assert_eq!(metabolism_score(1.0, 1.0, 1.0, 1.0, 1.0), 1.0);
        assert!((metabolism_score(1.0, 0.0, 1.0, 0.0, 1.0) - 0.6).abs() < 1e-12);
        assert_eq!(high_friction_risk(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0), 0.0);
        assert_eq!(high_friction_risk(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0), 1.0);
        assert!((high_friction_risk(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0) - 1.0 / 7.0).abs() < 1e-12);
        assert_eq!(mean_present(&[Some(1.0), None, Some(0.0)]), Some(0.5));
        assert_eq!(mean_present(&[None]), None);
    }

    #[test]
    fn ascvd_cases() {
        let w = AscvdWeights::default();
        let young = inherent_ascvd(20.0, "white", 0.9, false, &w).unwrap();
        let old = inherent_ascvd(55.0, "white", 0.3, true, &w).unwrap();
        assert!(young < old);
        let off = inherent_ascvd(40.0, "asian", 0.5, false, &w).unwrap();
        let on = inherent_ascvd(40.0, "asian", 0.5, true, &w).unwrap();
        assert!(on > off);
        for (age, eth, t, s) in [(18.0, "black", 0.0, true), (70.0, "martian", 1.0, false)] {
            assert_eq!(inherent_ascvd(age, eth, t, s, &AscvdWeights::zero()).unwrap(), 0.5);
        }
        // Unknown ethnicity is neutral, like "white" (offset 0).
        assert_eq!(
            inherent_ascvd(45.0, "unknown", 0.5, false, &w).unwrap(),
            inherent_ascvd(45.0, "White", 0.5, false, &w).unwrap()
        );
        assert!(inherent_ascvd(17.0, "white", 0.5, false, &w).is_err());
    }

    #[test]
    fn heart_cases() {
        assert!((heart_score(0.8, 0.6, 0.3) - 0.7).abs() < 1e-12);
        assert_eq!(heart_score(1.0, 1.0, 0.0), 1.0);
        assert!(heart_score(0.5, 0.5, 0.4) < heart_score(0.5, 0.5, 0.3));
        let w = HeartWeights::default();
        assert_eq!(w.score(Some(0.8), Some(0.6), 0.3, Some(0.9)), Some(heart_score(0.8, 0.6, 0.3)));
        assert!((w.score(None, Some(0.6), 0.3, None).unwrap() - 0.65).abs() < 1e-12);
    }
}
