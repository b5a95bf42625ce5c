use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{Duration, NaiveDate, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};

use super::face::{fwhr, FacialLandmarks};
use super::scores::{
    anthropometrics, inherent_ascvd, mean_present, normalize_present, AscvdWeights, HeartWeights,
};
use crate::enviro::{ses_score, EnvironmentRecord};
use crate::error::{BioVarError, Error, Result};
use crate::features::{stroke_volume_proxy, CardiacOptions, DailyFeatures};
use crate::ingest::AthleteProfile;
use crate::io::opt_cell;

/// Raw bio-variables that are cohort-normalized.
///
/// `flip` marks variables reversed before entering their score. Health
/// scores (circulation, metabolism) want higher = healthier, so BMI, WHtR
/// and HRD flip. High-friction risk wants higher = more risk, so education
/// and income flip while crime, cardiac deaths and pollution do not.
/// Circadian inputs already read as disruption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BioVar {
    Fwhr,
    Bmi,
    Whtr,
    Crf,
    Hrr,
    Sv,
    Trimp,
    WorkKj,
    Hrd,
    ActiveTime,
    Education,
    Income,
    Crime,
    CardiacDeath,
    Pm25,
    Noise,
    Light,
    TzChange,
    StartVariability,
}

impl BioVar {
    pub const ALL: [BioVar; 19] = [
        BioVar::Fwhr,
        BioVar::Bmi,
        BioVar::Whtr,
        BioVar::Crf,
        BioVar::Hrr,
        BioVar::Sv,
        BioVar::Trimp,
        BioVar::WorkKj,
        BioVar::Hrd,
        BioVar::ActiveTime,
        BioVar::Education,
        BioVar::Income,
        BioVar::Crime,
        BioVar::CardiacDeath,
        BioVar::Pm25,
        BioVar::Noise,
        BioVar::Light,
        BioVar::TzChange,
        BioVar::StartVariability,
    ];

    /// Column name in panel CSVs, with units where they matter.
    pub fn column(self) -> &'static str {
        match self {
            BioVar::Fwhr => "fwhr",
            BioVar::Bmi => "bmi",
            BioVar::Whtr => "whtr",
            BioVar::Crf => "crf_vo2max",
            BioVar::Hrr => "hrr_bpm",
            BioVar::Sv => "sv_ml",
            BioVar::Trimp => "trimp_4wk",
            BioVar::WorkKj => "work_kj_4wk",
            BioVar::Hrd => "hrd_pct_per_h",
            BioVar::ActiveTime => "active_time_h_4wk",
            BioVar::Education => "education_level",
            BioVar::Income => "income_usd",
            BioVar::Crime => "crime_index",
            BioVar::CardiacDeath => "cardiac_death_per100k",
            BioVar::Pm25 => "pm25",
            BioVar::Noise => "noise_db",
            BioVar::Light => "light_index",
            BioVar::TzChange => "tz_change_h_4wk",
            BioVar::StartVariability => "start_variability_min_4wk",
        }
    }

    /// Short label for figures.
    pub fn label(self) -> &'static str {
        match self {
            BioVar::Fwhr => "fWHR",
            BioVar::Bmi => "BMI",
            BioVar::Whtr => "WHR",
            BioVar::Crf => "CRF",
            BioVar::Hrr => "HRR",
            BioVar::Sv => "SV",
            BioVar::Trimp => "TRIMP",
            BioVar::WorkKj => "kJ",
            BioVar::Hrd => "HRD",
            BioVar::ActiveTime => "Active time",
            BioVar::Education => "Education",
            BioVar::Income => "Income",
            BioVar::Crime => "Crime",
            BioVar::CardiacDeath => "Cardiac deaths",
            BioVar::Pm25 => "Air (PM2.5)",
            BioVar::Noise => "Noise",
            BioVar::Light => "Light",
            BioVar::TzChange => "Time zone change",
            BioVar::StartVariability => "Start time variability",
        }
    }

    pub fn flip(self) -> bool {
        matches!(
            self,
            BioVar::Bmi | BioVar::Whtr | BioVar::Hrd | BioVar::Education | BioVar::Income
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BioVarConfig {
    /// Look-back for the "last 4 weeks" variables, days.
    pub window_days: u32,
    pub cardiac: CardiacOptions,
    pub ascvd: AscvdWeights,
    pub heart: HeartWeights,
}

impl Default for BioVarConfig {
    fn default() -> Self {
        BioVarConfig {
            window_days: 28,
            cardiac: CardiacOptions::default(),
            ascvd: AscvdWeights::default(),
            heart: HeartWeights::default(),
        }
    }
}

/// Everything known about one subject on the reference date.
#[derive(Debug, Clone)]
pub struct SubjectInputs<'a> {
    pub athlete: &'a AthleteProfile,
    pub as_of: NaiveDate,
    pub daily: &'a [DailyFeatures],
    /// Estimated VO2max, mL/kg/min.
    pub crf: Option<f64>,
    pub landmarks: Option<FacialLandmarks>,
    pub environment: Option<&'a EnvironmentRecord>,
}

/// Un-normalized values of one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawBioVariables {
    pub subject_id: String,
    pub age: f64,
    pub ethnicity: String,
    pub smoker: bool,
    pub education_level: u8,
    pub occupation_level: u8,
    pub anthropometric_flag: bool,
    pub values: BTreeMap<BioVar, Option<f64>>,
}

impl RawBioVariables {
    pub fn get(&self, var: BioVar) -> Option<f64> {
        self.values.get(&var).copied().flatten()
    }
}

fn minutes_of_day(t: NaiveTime) -> f64 {
    f64::from(t.num_seconds_from_midnight()) / 60.0
}

/// Mean absolute change of start time between consecutive exercise days,
/// minutes, taking the shorter way around midnight.
fn start_variability(starts: &[NaiveTime]) -> Option<f64> {
    let diffs: Vec<f64> = starts
        .windows(2)
        .map(|w| {
            let d = (minutes_of_day(w[1]) - minutes_of_day(w[0])).abs();
            d.min(1440.0 - d)
        })
        .collect();
    (!diffs.is_empty()).then(|| diffs.iter().sum::<f64>() / diffs.len() as f64)
}

/// Hours of UTC-offset change summed over the window's day boundaries.
fn tz_change_hours(athlete: &AthleteProfile, first: NaiveDate, last: NaiveDate) -> f64 {
    first
        .iter_days()
        .take_while(|d| *d <= last)
        .map(|d| (athlete.utc_offset_on(d) - athlete.utc_offset_on(d - Duration::days(1))).abs())
        .sum()
}

pub fn raw_bio_variables(inputs: &SubjectInputs<'_>, cfg: &BioVarConfig) -> Result<RawBioVariables> {
    let a = inputs.athlete;
    let first = inputs.as_of - Duration::days(i64::from(cfg.window_days.max(1)) - 1);
    let days: Vec<&DailyFeatures> = inputs
        .daily
        .iter()
        .filter(|d| (first..=inputs.as_of).contains(&d.date))
        .collect();
    let sum = |f: &dyn Fn(&DailyFeatures) -> Option<f64>| {
        if days.is_empty() {
            Some(0.0)
        } else {
            days.iter().filter_map(|d| f(d)).reduce(|x, y| x + y)
        }
    };
    let mean = |f: &dyn Fn(&DailyFeatures) -> Option<f64>| mean_present(&days.iter().map(|d| f(d)).collect::<Vec<_>>());
    let starts: Vec<NaiveTime> = days.iter().filter_map(|d| d.exercise_start_time).collect();
    let body = anthropometrics(a.height, a.body_mass, a.waist)?;
    let fwhr = inputs.landmarks.as_ref().map(fwhr).transpose()?;
    let env = |f: fn(&EnvironmentRecord) -> Option<f64>| inputs.environment.and_then(f);

    let values = BTreeMap::from([
        (BioVar::Fwhr, fwhr),
        (BioVar::Bmi, Some(body.bmi)),
        (BioVar::Whtr, Some(body.whtr)),
        (BioVar::Crf, inputs.crf),
        (BioVar::Hrr, mean(&|d| d.hr_recovery_60s)),
        (BioVar::Sv, inputs.crf.map(|v| stroke_volume_proxy(v, a, &cfg.cardiac))),
        (BioVar::Trimp, sum(&|d| d.trimp)),
        (BioVar::WorkKj, sum(&|d| d.work_kj)),
        (BioVar::Hrd, mean(&|d| d.hr_drift)),
        (BioVar::ActiveTime, sum(&|d| Some(d.active_time / 3600.0))),
        (BioVar::Education, Some(f64::from(a.education_level))),
        (BioVar::Income, env(|e| e.income)),
        (BioVar::Crime, env(|e| e.crime_index)),
        (BioVar::CardiacDeath, env(|e| e.cardiac_death_rate)),
        (BioVar::Pm25, env(|e| e.pm25)),
        (BioVar::Noise, env(|e| e.noise)),
        (BioVar::Light, env(|e| e.light_pollution)),
        (BioVar::TzChange, Some(tz_change_hours(a, first, inputs.as_of))),
        (BioVar::StartVariability, start_variability(&starts)),
    ]);
    Ok(RawBioVariables {
        subject_id: a.subject_id.clone(),
        age: a.age_on(inputs.as_of),
        ethnicity: a.ethnicity.clone(),
        smoker: a.smoker,
        education_level: a.education_level,
        occupation_level: a.occupation_level,
        anthropometric_flag: body.sanity_flag,
        values,
    })
}

/// Bio-variables and summary scores of one subject relative to its cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BioVariablePanel {
    pub subject_id: String,
    pub age: f64,
    pub fwhr: Option<f64>,
    /// Cohort-normalized fWHR.
    pub testosterone_proxy: Option<f64>,
    pub bmi: f64,
    pub whtr: f64,
    pub ses: Option<f64>,
    pub circadian_disruption: Option<f64>,
    pub circulation: Option<f64>,
    pub metabolism: Option<f64>,
    pub inherent_ascvd: f64,
    pub high_friction: Option<f64>,
    pub heart_score: f64,
    pub raw: BTreeMap<BioVar, Option<f64>>,
    /// Min-max normalized raw values, without polarity flips.
    pub normalized: BTreeMap<BioVar, Option<f64>>,
}

/// Names of the summary columns, in output order.
pub const SCORE_COLUMNS: [&str; 8] = [
    "testosterone_proxy",
    "ses",
    "circadian_disruption",
    "circulation",
    "metabolism",
    "inherent_ascvd",
    "high_friction",
    "heart_score",
];

impl BioVariablePanel {
    fn scores(&self) -> [Option<f64>; 8] {
        [
            self.testosterone_proxy,
            self.ses,
            self.circadian_disruption,
            self.circulation,
            self.metabolism,
            Some(self.inherent_ascvd),
            self.high_friction,
            Some(self.heart_score),
        ]
    }

    /// Labelled [0, 1] cells for figures: normalized bio-variables (fWHR
    /// shown as the testosterone proxy) followed by the summary scores.
    pub fn cells(&self) -> Vec<(String, Option<f64>)> {
        let mut cells: Vec<(String, Option<f64>)> = vec![("Testosterone proxy".into(), self.testosterone_proxy)];
        for var in BioVar::ALL.into_iter().filter(|v| *v != BioVar::Fwhr) {
            cells.push((var.label().into(), self.normalized.get(&var).copied().flatten()));
        }
        for (label, value) in [
            ("SES", self.ses),
            ("Circadian disruption", self.circadian_disruption),
            ("Circulation", self.circulation),
            ("Metabolism", self.metabolism),
            ("Inherent ASCVD", Some(self.inherent_ascvd)),
            ("High friction", self.high_friction),
            ("Heart score", Some(self.heart_score)),
        ] {
            cells.push((label.into(), value));
        }
        cells
    }
}

/// Normalizes every bio-variable across `cohort` and computes the scores.
pub fn assemble_panels(cohort: &[RawBioVariables], cfg: &BioVarConfig) -> Result<Vec<BioVariablePanel>> {
    let mut normalized: BTreeMap<BioVar, Vec<Option<f64>>> = BTreeMap::new();
    for var in BioVar::ALL {
        let column: Vec<Option<f64>> = cohort.iter().map(|r| r.get(var)).collect();
        normalized.insert(var, normalize_present(&column, false)?);
    }
    let mut panels = Vec::with_capacity(cohort.len());
    for (i, raw) in cohort.iter().enumerate() {
        let n = |v: BioVar| normalized[&v][i];
        let o = |v: BioVar| n(v).map(|x| if v.flip() { 1.0 - x } else { x });
        let testosterone_proxy = n(BioVar::Fwhr);
        let ses = n(BioVar::Income)
            .map(|income| ses_score(raw.education_level, raw.occupation_level, income))
            .transpose()?;
        let circadian_disruption = mean_present(&[o(BioVar::Light), o(BioVar::TzChange), o(BioVar::StartVariability)]);
        let circulation = mean_present(&[o(BioVar::Crf), o(BioVar::Hrr), o(BioVar::Sv), o(BioVar::Trimp)]);
        let metabolism = mean_present(&[
            o(BioVar::WorkKj),
            o(BioVar::Hrd),
            o(BioVar::ActiveTime),
            o(BioVar::Bmi),
            o(BioVar::Whtr),
        ]);
        let high_friction = mean_present(&[
            o(BioVar::Education),
            o(BioVar::Income),
            o(BioVar::Crime),
            o(BioVar::CardiacDeath),
            o(BioVar::Pm25),
            o(BioVar::Noise),
            o(BioVar::Light),
        ]);
        let inherent_ascvd = inherent_ascvd(
            raw.age,
            &raw.ethnicity,
            testosterone_proxy.unwrap_or(0.5),
            raw.smoker,
            &cfg.ascvd,
        )?;
        let heart_score = cfg
            .heart
            .score(circulation, metabolism, inherent_ascvd, circadian_disruption)
            .ok_or_else(|| BioVarError::Domain("heart score weights select no present component".into()))?;
        panels.push(BioVariablePanel {
            subject_id: raw.subject_id.clone(),
            age: raw.age,
            fwhr: raw.get(BioVar::Fwhr),
            testosterone_proxy,
            bmi: raw.get(BioVar::Bmi).unwrap_or(f64::NAN),
            whtr: raw.get(BioVar::Whtr).unwrap_or(f64::NAN),
            ses,
            circadian_disruption,
            circulation,
            metabolism,
            inherent_ascvd,
            high_friction,
            heart_score,
            raw: raw.values.clone(),
            normalized: BioVar::ALL.iter().map(|&v| (v, n(v))).collect(),
        });
    }
    Ok(panels)
}

pub const LANDMARK_HEADER: [&str; 9] = [
    "subject_id",
    "left_zygion_x",
    "left_zygion_y",
    "right_zygion_x",
    "right_zygion_y",
    "upper_lip_x",
    "upper_lip_y",
    "brow_x",
    "brow_y",
];

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

/// Reads per-subject landmarks, validating the upright-image orientation.
pub fn read_landmarks<R: Read>(reader: R) -> Result<BTreeMap<String, FacialLandmarks>> {
    let mut r = csv::Reader::from_reader(reader);
    crate::features::check_header(r.headers().map_err(csv_err)?, &LANDMARK_HEADER)?;
    let mut out = BTreeMap::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut xy = [0.0; 8];
        for (k, slot) in xy.iter_mut().enumerate() {
            *slot = rec[k + 1]
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("landmarks line {line}: bad {}", LANDMARK_HEADER[k + 1])))?;
        }
        let lm = FacialLandmarks {
            left_zygion: (xy[0], xy[1]),
            right_zygion: (xy[2], xy[3]),
            upper_lip_midpoint: (xy[4], xy[5]),
            brow_midpoint: (xy[6], xy[7]),
        };
        lm.validate()
            .map_err(|e| Error::Config(format!("landmarks line {line}: {e}")))?;
        if out.insert(rec[0].trim().to_string(), lm).is_some() {
            return Err(Error::Config(format!("landmarks line {line}: duplicate subject {}", &rec[0])));
        }
    }
    Ok(out)
}

/// Panel header: subject, age, raw bio-variables, then the summary columns.
pub fn panel_header() -> Vec<&'static str> {
    let mut h = vec!["subject_id", "age"];
    h.extend(BioVar::ALL.iter().map(|v| v.column()));
    h.extend(SCORE_COLUMNS);
    h
}

/// One row per subject; absent values are empty cells.
pub fn write_panels<W: Write>(panels: &[BioVariablePanel], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(panel_header()).map_err(csv_err)?;
    for p in panels {
        let mut row = vec![p.subject_id.clone(), p.age.to_string()];
        row.extend(BioVar::ALL.iter().map(|v| opt_cell(p.raw.get(v).copied().flatten())));
        row.extend(p.scores().iter().map(|s| opt_cell(*s)));
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("csv write: {e}")))
}
