use serde::{Deserialize, Serialize};

use crate::error::FeatureError;
use crate::ingest::{ActivityStream, AthleteProfile, Channel};

/// Speed above which a sample counts as active when cadence is unavailable.
pub const ACTIVE_SPEED_MPS: f64 = 0.5;

/// Seconds of active effort. Uses cadence when the stream has it, then
/// speed, and otherwise counts every sample (time-only devices).
pub fn active_time(stream: &ActivityStream) -> f64 {
    let count = |pred: &dyn Fn(f64) -> bool, channel: Channel| {
        stream.samples.iter().filter(|s| s.get(channel).is_some_and(pred)).count() as f64
    };
    if stream.has_channel(Channel::Cadence) {
        count(&|c| c > 0.0, Channel::Cadence)
    } else if stream.has_channel(Channel::Speed) {
        count(&|v| v > ACTIVE_SPEED_MPS, Channel::Speed)
    } else {
        stream.samples.len() as f64
    }
}

/// Exponential heart-rate weighting constants. Defaults are the male
/// coefficients of the Banister training impulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrimpParams {
    pub scale: f64,
    pub exponent: f64,
    /// Minimum fraction of samples that must carry heart rate.
    pub min_hr_coverage: f64,
}

impl Default for TrimpParams {
    fn default() -> Self {
        TrimpParams {
            scale: 0.64,
            exponent: 1.92,
            min_hr_coverage: 0.8,
        }
    }
}

impl TrimpParams {
    /// Load accrued per minute at a heart-rate reserve fraction.
    pub fn per_minute(&self, reserve_fraction: f64) -> f64 {
        let x = reserve_fraction.clamp(0.0, 1.0);
        x * self.scale * (self.exponent * x).exp()
    }
}

/// Heart-rate reserve fraction, clamped to [0, 1].
pub fn hr_reserve_fraction(hr: f64, athlete: &AthleteProfile) -> f64 {
    ((hr - athlete.resting_hr) / (athlete.max_hr - athlete.resting_hr)).clamp(0.0, 1.0)
}

/// Training impulse over minute-mean heart rate. A trailing partial minute
/// counts in proportion to its length.
pub fn trimp(stream: &ActivityStream, athlete: &AthleteProfile, params: &TrimpParams) -> Result<f64, FeatureError> {
    if !(athlete.resting_hr < athlete.max_hr) {
        return Err(FeatureError::Domain(format!(
            "resting_hr {} must be below max_hr {}",
            athlete.resting_hr, athlete.max_hr
        )));
    }
    let coverage = stream.coverage(Channel::HeartRate);
    if coverage < params.min_hr_coverage {
        return Err(FeatureError::InsufficientHeartRate {
            coverage: 100.0 * coverage,
            required: 100.0 * params.min_hr_coverage,
        });
    }
    let total = stream
        .samples
        .chunks(60)
        .map(|minute| {
            let (sum, n) = minute
                .iter()
                .filter_map(|s| s.heart_rate)
                .fold((0.0, 0usize), |(sum, n), hr| (sum + hr, n + 1));
            if n == 0 {
                return 0.0;
            }
            let weight = minute.len() as f64 / 60.0;
            weight * params.per_minute(hr_reserve_fraction(sum / n as f64, athlete))
        })
        .sum();
    Ok(total)
}

/// Training impulse of a gap-free per-second heart-rate series; equals
/// [`trimp`] on a stream carrying exactly these values.
pub fn trimp_series(hr: &[f64], athlete: &AthleteProfile, params: &TrimpParams) -> f64 {
    hr.chunks(60)
        .map(|minute| {
            let mean = minute.iter().sum::<f64>() / minute.len() as f64;
            minute.len() as f64 / 60.0 * params.per_minute(hr_reserve_fraction(mean, athlete))
        })
        .sum()
}

/// Mechanical work in kJ, or `None` without a power channel.
pub fn mechanical_work(stream: &ActivityStream) -> Option<f64> {
    if !stream.has_channel(Channel::Power) {
        return None;
    }
    let joules: f64 = stream.samples.iter().filter_map(|s| s.power).sum();
    Some(joules / 1000.0)
}
