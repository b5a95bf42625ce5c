//! Global and personal training/evaluation protocols over a cohort of
//! subject feature tables.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bank::{fit_vam_bank, select_vam_model, table1_report, Table1Row, VamModelBank};
use super::conversion::{ground_truth_crf, rolling_mean, Conversion, TRUTH_SPAN_DAYS};
use super::estimate::{combine_estimates, CrfEstimate, Source};
use super::eval::{error_stats, evaluate_cohort, mean_ci95, EvalReport};
use super::ols::{fit_ols, LinearModel};
use super::split::{personal_cut, split_subjects, Mode, SubjectSplit};
use crate::error::{EstimatorError, Result};
use crate::features::{rolling_aggregate, LoadWindow, SubjectFeatures, WindowFeature};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    /// Trailing span of the load features and of the VAM rolling mean.
    pub span_days: u32,
    /// Trailing span of the reference series.
    pub truth_span_days: u32,
    /// Dates earlier than `first + max(spans, min_history_days) − 1` are not
    /// used, so every evaluated window is full.
    pub min_history_days: u32,
    pub conversion: Conversion,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            span_days: 42,
            truth_span_days: TRUTH_SPAN_DAYS,
            min_history_days: 0,
            conversion: Conversion::default(),
        }
    }
}

/// Per-subject series derived from the feature tables for one configuration.
struct Prepared<'a> {
    subject_id: &'a str,
    loads: BTreeMap<NaiveDate, LoadWindow>,
    truth: BTreeMap<NaiveDate, f64>,
    /// Dates with a full history and a reference value, ascending.
    eligible: Vec<NaiveDate>,
    /// Uphill windows grouped per activity.
    rides: Vec<(NaiveDate, Vec<WindowFeature>)>,
}

fn prepare<'a>(f: &'a SubjectFeatures, cfg: &ProtocolConfig) -> Prepared<'a> {
    let loads: BTreeMap<_, _> = rolling_aggregate(&f.daily, cfg.span_days)
        .into_iter()
        .map(|w| (w.end_date, w))
        .collect();
    let daily_power: Vec<_> = f.daily.iter().map(|d| (d.date, d.best_4min_relative_power)).collect();
    let truth: BTreeMap<_, _> = ground_truth_crf(&daily_power, cfg.truth_span_days, &cfg.conversion)
        .into_iter()
        .collect();
    let history = cfg.span_days.max(cfg.truth_span_days).max(cfg.min_history_days).max(1);
    let eligible = match f.first_date() {
        Some(first) => {
            let from = first + Duration::days(i64::from(history) - 1);
            truth.keys().filter(|&&d| d >= from && loads.contains_key(&d)).copied().collect()
        }
        None => Vec::new(),
    };
    let mut rides: Vec<(NaiveDate, Vec<WindowFeature>)> = Vec::new();
    let mut last_activity = None;
    for w in &f.windows {
        if last_activity != Some((w.date, w.activity)) {
            rides.push((w.date, Vec::new()));
            last_activity = Some((w.date, w.activity));
        }
        rides.last_mut().expect("pushed above").1.push(w.window);
    }
    Prepared {
        subject_id: &f.subject_id,
        loads,
        truth,
        eligible,
        rides,
    }
}

/// Fitted TIME, TRIMP and VAM estimators with their training errors in
/// VO2max units. A source that could not be fitted is absent.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EstimatorSet {
    pub time: Option<LinearModel>,
    pub trimp: Option<LinearModel>,
    pub vam: Option<VamModelBank>,
    pub training_errors: BTreeMap<Source, f64>,
}

/// Training data from one subject: reference dates, and the cut-off for
/// windows (exclusive; `None` uses every window).
struct TrainSlice<'p, 'a> {
    subject: &'p Prepared<'a>,
    dates: &'p [NaiveDate],
    windows_before: Option<NaiveDate>,
}

impl EstimatorSet {
    fn fit(slices: &[TrainSlice<'_, '_>], cfg: &ProtocolConfig) -> EstimatorSet {
        let mut set = EstimatorSet::default();
        for source in [Source::Time, Source::Trimp] {
            let pairs: Vec<(f64, f64)> = slices
                .iter()
                .flat_map(|s| {
                    s.dates.iter().map(|d| {
                        let load = &s.subject.loads[d];
                        let x = match source {
                            Source::Time => load.total_active_time,
                            _ => load.total_trimp,
                        };
                        (x, s.subject.truth[d])
                    })
                })
                .collect();
            match fit_ols(&pairs) {
                Ok(m) => {
                    set.training_errors.insert(source, m.training_rmse);
                    match source {
                        Source::Time => set.time = Some(m),
                        _ => set.trimp = Some(m),
                    }
                }
                Err(e) => log::warn!("{source} model not fitted: {e}"),
            }
        }

        let windows: Vec<WindowFeature> = slices
            .iter()
            .flat_map(|s| {
                s.subject
                    .rides
                    .iter()
                    .filter(move |(d, _)| s.windows_before.is_none_or(|cut| *d < cut))
                    .flat_map(|(_, w)| w.iter().copied())
            })
            .collect();
        match fit_vam_bank(&windows) {
            Ok(bank) => {
                let probe = EstimatorSet {
                    vam: Some(bank),
                    ..EstimatorSet::default()
                };
                let pairs: Vec<(f64, f64)> = slices
                    .iter()
                    .flat_map(|s| {
                        let series = probe.vam_series(s.subject, cfg);
                        s.dates
                            .iter()
                            .filter_map(|d| Some((series.get(d).copied()?, s.subject.truth[d])))
                            .collect::<Vec<_>>()
                    })
                    .collect();
                if let Some(stats) = error_stats(&pairs) {
                    set.training_errors.insert(Source::Vam, stats.rmse);
                    set.vam = probe.vam;
                } else {
                    log::warn!("VAM model has no training dates with an estimate");
                }
            }
            Err(e) => log::warn!("VAM bank not fitted: {e}"),
        }
        set
    }

    /// Daily VAM estimate: per activity, the bank model chosen by the steepest
    /// window is applied to every uphill window and the maximum predicted
    /// relative power kept; the daily maximum then goes through the trailing
    /// mean and the conversion.
    fn vam_series(&self, p: &Prepared<'_>, cfg: &ProtocolConfig) -> BTreeMap<NaiveDate, f64> {
        let Some(bank) = &self.vam else {
            return BTreeMap::new();
        };
        let mut daily: BTreeMap<NaiveDate, f64> = BTreeMap::new();
        for (date, windows) in &p.rides {
            let steepest = windows.iter().map(|w| w.max_slope).fold(f64::NEG_INFINITY, f64::max);
            let model = select_vam_model(bank, steepest);
            let best = windows
                .iter()
                .filter_map(|w| w.vam)
                .map(|v| model.predict(v))
                .fold(f64::NEG_INFINITY, f64::max);
            if best.is_finite() {
                let e = daily.entry(*date).or_insert(f64::NEG_INFINITY);
                *e = e.max(best);
            }
        }
        let series: Vec<_> = daily.into_iter().collect();
        rolling_mean(&series, cfg.span_days)
            .into_iter()
            .map(|(d, p)| (d, cfg.conversion.to_vo2max(p)))
            .collect()
    }

    /// Single-source estimates for the given dates plus their fusion.
    fn predict(&self, p: &Prepared<'_>, dates: &[NaiveDate], cfg: &ProtocolConfig) -> Vec<PredictionRow> {
        let vam = self.vam_series(p, cfg);
        dates
            .iter()
            .map(|&date| {
                let load = &p.loads[&date];
                let mut singles = Vec::new();
                if let Some(m) = &self.time {
                    singles.push(CrfEstimate::single(date, m.predict(load.total_active_time), Source::Time));
                }
                if let Some(m) = &self.trimp {
                    singles.push(CrfEstimate::single(date, m.predict(load.total_trimp), Source::Trimp));
                }
                if let Some(&v) = vam.get(&date) {
                    singles.push(CrfEstimate::single(date, v, Source::Vam));
                }
                let mut estimates: BTreeMap<Source, f64> = singles.iter().map(|e| (e.source, e.vo2max)).collect();
                let mut weights = BTreeMap::new();
                if let Ok(c) = combine_estimates(&singles, &self.training_errors) {
                    estimates.insert(Source::Combined, c.vo2max);
                    weights = c.contributing_weights;
                }
                PredictionRow {
                    subject_id: p.subject_id.to_string(),
                    date,
                    truth: p.truth[&date],
                    estimates,
                    weights,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub subject_id: String,
    pub date: NaiveDate,
    pub truth: f64,
    pub estimates: BTreeMap<Source, f64>,
    pub weights: BTreeMap<Source, f64>,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const GLOBAL_KEY: &str = "global";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub estimators: EstimatorSet,
    /// Personal mode: first held-out date.
    pub test_from: Option<NaiveDate>,
}

/// Everything `estimate` needs to reproduce the test predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub mode: Mode,
    pub seed: u64,
    pub config: ProtocolConfig,
    pub split: Option<SubjectSplit>,
    /// `global`, or one entry per subject id.
    pub models: BTreeMap<String, TrainedModel>,
}

impl ModelFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serializes")
    }

    pub fn from_json(text: &str) -> Result<ModelFile> {
        #[derive(Deserialize)]
        struct Probe {
            format_version: u32,
        }
        let probe: Probe = serde_json::from_str(text)
            .map_err(|e| EstimatorError::Domain(format!("model file: {e}")))?;
        if probe.format_version != MODEL_FORMAT_VERSION {
            return Err(EstimatorError::Version {
                found: probe.format_version,
                expected: MODEL_FORMAT_VERSION,
            }
            .into());
        }
        Ok(serde_json::from_str(text).map_err(|e| EstimatorError::Domain(format!("model file: {e}")))?)
    }
}

fn subject_ids(cohort: &[SubjectFeatures]) -> Vec<String> {
    cohort.iter().map(|s| s.subject_id.clone()).collect()
}

fn fit_global(prepared: &[Prepared<'_>], train: &[String], cfg: &ProtocolConfig) -> Result<EstimatorSet> {
    let slices: Vec<TrainSlice> = prepared
        .iter()
        .filter(|p| train.iter().any(|t| t == p.subject_id))
        .map(|p| TrainSlice {
            subject: p,
            dates: &p.eligible,
            windows_before: None,
        })
        .collect();
    if slices.iter().all(|s| s.dates.is_empty()) {
        return Err(EstimatorError::Partition("no training subject has an eligible date".into()).into());
    }
    Ok(EstimatorSet::fit(&slices, cfg))
}

/// Fits estimators for `mode`.
pub fn train(cohort: &[SubjectFeatures], mode: Mode, seed: u64, cfg: &ProtocolConfig) -> Result<ModelFile> {
    let prepared: Vec<Prepared> = cohort.iter().map(|f| prepare(f, cfg)).collect();
    let (split, models) = match mode {
        Mode::Global => {
            let split = split_subjects(&subject_ids(cohort), seed)?;
            let set = fit_global(&prepared, &split.train, cfg)?;
            let models = BTreeMap::from([(
                GLOBAL_KEY.to_string(),
                TrainedModel {
                    estimators: set,
                    test_from: None,
                },
            )]);
            (Some(split), models)
        }
        Mode::Personal => {
            let fitted: Vec<Option<(String, TrainedModel)>> = prepared
                .par_iter()
                .map(|p| {
                    let cut = match personal_cut(p.eligible.len()) {
                        Ok(c) => c,
                        Err(e) => {
                            log::warn!("{}: skipped: {e}", p.subject_id);
                            return None;
                        }
                    };
                    let test_from = p.eligible[cut];
                    let slice = TrainSlice {
                        subject: p,
                        dates: &p.eligible[..cut],
                        windows_before: Some(test_from),
                    };
                    let set = EstimatorSet::fit(&[slice], cfg);
                    Some((
                        p.subject_id.to_string(),
                        TrainedModel {
                            estimators: set,
                            test_from: Some(test_from),
                        },
                    ))
                })
                .collect();
            let models: BTreeMap<_, _> = fitted.into_iter().flatten().collect();
            if models.is_empty() {
                return Err(EstimatorError::Partition("no subject has enough dated points".into()).into());
            }
            (None, models)
        }
    };
    Ok(ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        mode,
        seed,
        config: *cfg,
        split,
        models,
    })
}

/// Held-out predictions and their evaluation per source.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Estimates {
    pub rows: Vec<PredictionRow>,
    pub reports: BTreeMap<Source, EvalReport>,
}

impl Estimates {
    fn from_rows(rows: Vec<PredictionRow>) -> Estimates {
        let mut reports = BTreeMap::new();
        for source in Source::ALL {
            let mut pairs: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
            for r in &rows {
                if let Some(&v) = r.estimates.get(&source) {
                    pairs.entry(r.subject_id.clone()).or_default().push((v, r.truth));
                }
            }
            if let Ok(report) = evaluate_cohort(&pairs) {
                reports.insert(source, report);
            }
        }
        Estimates { rows, reports }
    }

    /// Per-subject RMSE of one source.
    pub fn subject_rmse(&self, source: Source) -> BTreeMap<String, f64> {
        self.reports
            .get(&source)
            .map(|r| r.per_subject.iter().map(|(k, s)| (k.clone(), s.rmse)).collect())
            .unwrap_or_default()
    }
}

/// Applies trained models to the held-out part of the cohort: test subjects
/// in global mode, each subject's later dates in personal mode.
pub fn estimate(cohort: &[SubjectFeatures], models: &ModelFile) -> Result<Estimates> {
    let cfg = &models.config;
    let rows: Vec<PredictionRow> = match models.mode {
        Mode::Global => {
            let split = models
                .split
                .as_ref()
                .ok_or_else(|| EstimatorError::Domain("global model file without a split".into()))?;
            let set = &models
                .models
                .get(GLOBAL_KEY)
                .ok_or_else(|| EstimatorError::Domain("global model file without a global model".into()))?
                .estimators;
            cohort
                .par_iter()
                .filter(|f| split.test.contains(&f.subject_id))
                .flat_map_iter(|f| {
                    let p = prepare(f, cfg);
                    set.predict(&p, &p.eligible, cfg)
                })
                .collect()
        }
        Mode::Personal => cohort
            .par_iter()
            .filter_map(|f| Some((f, models.models.get(&f.subject_id)?)))
            .flat_map_iter(|(f, m)| {
                let p = prepare(f, cfg);
                let from = m.test_from.unwrap_or(NaiveDate::MIN);
                let dates: Vec<_> = p.eligible.iter().copied().filter(|&d| d >= from).collect();
                m.estimators.predict(&p, &dates, cfg)
            })
            .collect(),
    };
    if rows.is_empty() {
        return Err(EstimatorError::EmptyOverlap.into());
    }
    Ok(Estimates::from_rows(rows))
}

pub fn run_protocol(cohort: &[SubjectFeatures], mode: Mode, seed: u64, cfg: &ProtocolConfig) -> Result<Estimates> {
    estimate(cohort, &train(cohort, mode, seed, cfg)?)
}

/// Global predictions for every subject: the seeded split is used in both
/// directions, so each subject is predicted by a model that never saw it.
/// With `test_from`, only dates on or after the subject's entry are kept.
pub fn global_crossfit(
    cohort: &[SubjectFeatures],
    seed: u64,
    cfg: &ProtocolConfig,
    test_from: Option<&BTreeMap<String, NaiveDate>>,
) -> Result<Estimates> {
    let prepared: Vec<Prepared> = cohort.iter().map(|f| prepare(f, cfg)).collect();
    let split = split_subjects(&subject_ids(cohort), seed)?;
    let mut rows = Vec::new();
    for (train_ids, test_ids) in [(&split.train, &split.test), (&split.test, &split.train)] {
        let set = fit_global(&prepared, train_ids, cfg)?;
        for p in prepared.iter().filter(|p| test_ids.iter().any(|t| t == p.subject_id)) {
            let dates: Vec<_> = match test_from {
                Some(map) => match map.get(p.subject_id) {
                    Some(&from) => p.eligible.iter().copied().filter(|&d| d >= from).collect(),
                    None => continue,
                },
                None => p.eligible.clone(),
            };
            rows.extend(set.predict(p, &dates, cfg));
        }
    }
    rows.sort_by(|a, b| (&a.subject_id, a.date).cmp(&(&b.subject_id, b.date)));
    Ok(Estimates::from_rows(rows))
}

/// VAM bank trained on the global training subjects with test RMSE on the
/// held-out subjects' windows.
pub fn table1(cohort: &[SubjectFeatures], seed: u64) -> Result<Vec<Table1Row>> {
    let split = split_subjects(&subject_ids(cohort), seed)?;
    let windows = |ids: &[String]| -> Vec<WindowFeature> {
        cohort
            .iter()
            .filter(|f| ids.contains(&f.subject_id))
            .flat_map(|f| f.windows.iter().map(|w| w.window))
            .collect()
    };
    let bank = fit_vam_bank(&windows(&split.train))?;
    Ok(table1_report(&bank, &windows(&split.test)))
}

/// One row of the memory sweep: per-subject test RMSE summarized as mean and
/// a normal-approximation 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub span_days: u32,
    pub source: Source,
    pub n_subjects: usize,
    pub mean_rmse: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub is_default: bool,
}

impl SweepRow {
    /// An interval needs at least two subjects.
    pub fn flagged(&self) -> bool {
        self.ci_low.is_none()
    }
}

pub const DEFAULT_SPAN_DAYS: u32 = 42;

pub fn memory_sweep(cohort: &[SubjectFeatures], spans: &[u32], seed: u64, cfg: &ProtocolConfig) -> Result<Vec<SweepRow>> {
    if spans.len() < 2 || spans.iter().any(|&s| s < 7) {
        return Err(EstimatorError::Domain("memory sweep needs at least two spans, each >= 7 days".into()).into());
    }
    let history = spans.iter().copied().max().unwrap_or(0).max(cfg.min_history_days);
    let mut out = Vec::new();
    for &span in spans {
        let run_cfg = ProtocolConfig {
            span_days: span,
            min_history_days: history,
            ..*cfg
        };
        let est = run_protocol(cohort, Mode::Global, seed, &run_cfg)?;
        for source in Source::SINGLE {
            let errs: Vec<f64> = est.subject_rmse(source).into_values().collect();
            let n = errs.len();
            let Some((mean, ci)) = mean_ci95(&errs) else { continue };
            if ci.is_none() {
                log::warn!("span {span} {source}: one subject, no confidence interval");
            }
            let (ci_low, ci_high) = (ci.map(|c| c.0), ci.map(|c| c.1));
            out.push(SweepRow {
                span_days: span,
                source,
                n_subjects: n,
                mean_rmse: mean,
                ci_low,
                ci_high,
                is_default: span == DEFAULT_SPAN_DAYS,
            });
        }
    }
    Ok(out)
}
