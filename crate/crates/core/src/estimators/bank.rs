//! Slope-thresholded VAM → relative power models.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ols::{fit_ols, LinearModel};
use crate::error::{Error, EstimatorError, Result};
use crate::features::WindowFeature;

pub const MAX_THRESHOLD: u8 = 9;
pub const MIN_BANK_WINDOWS: usize = 10;

/// Models keyed by integer slope threshold in percent, contiguous from 0.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VamModelBank {
    pub models: BTreeMap<u8, LinearModel>,
}

/// Windows usable for the bank: power and VAM both present.
fn usable(windows: &[WindowFeature]) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
    windows
        .iter()
        .filter_map(|w| Some((w.max_slope, w.vam?, w.mean_relative_power?)))
}

fn pairs_at(windows: &[WindowFeature], threshold: u8) -> Vec<(f64, f64)> {
    usable(windows)
        .filter(|&(s, _, _)| s >= f64::from(threshold))
        .map(|(_, v, p)| (v, p))
        .collect()
}

/// Fits one model per threshold 0..=9 on windows whose max slope reaches it.
/// The bank stops at the first threshold with too few windows or a degenerate
/// design; threshold 0 must be feasible.
pub fn fit_vam_bank(windows: &[WindowFeature]) -> Result<VamModelBank, EstimatorError> {
    let mut bank = VamModelBank::default();
    for t in 0..=MAX_THRESHOLD {
        let pairs = pairs_at(windows, t);
        let fitted = if pairs.len() < MIN_BANK_WINDOWS {
            Err(format!("{} windows with slope >= {t}%, need {MIN_BANK_WINDOWS}", pairs.len()))
        } else {
            fit_ols(&pairs).map_err(|e| e.to_string())
        };
        match fitted {
            Ok(m) => {
                bank.models.insert(t, m);
            }
            Err(why) if t == 0 => return Err(EstimatorError::Bank(why)),
            Err(why) => {
                log::warn!("VAM bank truncated at threshold {}: {why}", t - 1);
                break;
            }
        }
    }
    Ok(bank)
}

impl VamModelBank {
    pub fn max_threshold(&self) -> Option<u8> {
        self.models.keys().next_back().copied()
    }
}

/// Model with the largest threshold not above the observed slope, clamped to
/// the bank's range. 5.3% selects the 5+ model.
pub fn select_vam_model(bank: &VamModelBank, max_slope_observed: f64) -> &LinearModel {
    let top = bank.max_threshold().expect("bank must be nonempty");
    let floor = if max_slope_observed.is_nan() {
        0.0
    } else {
        max_slope_observed.floor().clamp(0.0, f64::from(top))
    };
    bank.models
        .range(..=floor as u8)
        .next_back()
        .map(|(_, m)| m)
        .unwrap_or_else(|| bank.models.values().next().expect("bank must be nonempty"))
}

/// One Table 1 row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub threshold: u8,
    pub test_rmse: Option<f64>,
    pub train_rmse: f64,
    pub train_r2: f64,
    pub n_train: usize,
}

pub const TABLE1_HEADER: [&str; 5] = [
    "Slope threshold (%)",
    "Test Set RMSE (Rel. Power)",
    "Training Set RMSE (Rel. Power)",
    "Training R Squared",
    "Size of training set",
];

/// Training metrics per threshold plus RMSE on held-out windows filtered by
/// the same threshold.
pub fn table1_report(bank: &VamModelBank, test_windows: &[WindowFeature]) -> Vec<Table1Row> {
    bank.models
        .iter()
        .map(|(&t, m)| {
            let test = pairs_at(test_windows, t);
            let test_rmse = (!test.is_empty()).then(|| {
                (test.iter().map(|&(x, y)| (y - m.predict(x)).powi(2)).sum::<f64>() / test.len() as f64).sqrt()
            });
            Table1Row {
                threshold: t,
                test_rmse,
                train_rmse: m.training_rmse,
                train_r2: m.training_r2,
                n_train: m.n_train,
            }
        })
        .collect()
}

pub fn write_table1<W: Write>(rows: &[Table1Row], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::Config(format!("table 1: {e}"));
    w.write_record(TABLE1_HEADER).map_err(err)?;
    for r in rows {
        w.write_record([
            format!("{}+", r.threshold),
            r.test_rmse.map(|v| format!("{v:.3}")).unwrap_or_default(),
            format!("{:.3}", r.train_rmse),
            format!("{:.3}", r.train_r2),
            r.n_train.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("table 1: {e}")))
}
