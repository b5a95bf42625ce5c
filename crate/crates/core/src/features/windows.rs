use serde::{Deserialize, Serialize};

use crate::error::FeatureError;
use crate::ingest::{ActivityStream, AthleteProfile, Channel, SensorSample};

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.80665;

const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowOptions {
    pub length_s: usize,
    pub stride_s: usize,
    /// Length of the sub-segments over which grade is measured.
    pub slope_segment_s: usize,
    /// Width of the centered moving average applied to altitude before
    /// grades are taken.
    pub smoothing_s: usize,
    /// Minimum mean grade (percent) for a climbing window to count as
    /// uphill. Zero means any net ascent qualifies.
    pub uphill_min_slope_pct: f64,
    /// Require the smoothed altitude to rise over every sub-segment, so a
    /// window that mixes a climb with flat or descending road is not uphill.
    pub sustained_climb: bool,
    /// Sub-segments covering less horizontal distance are ignored.
    pub min_segment_distance_m: f64,
}

impl Default for WindowOptions {
    fn default() -> Self {
        WindowOptions {
            length_s: 240,
            stride_s: 60,
            slope_segment_s: 30,
            smoothing_s: 15,
            uphill_min_slope_pct: 0.0,
            sustained_climb: true,
            min_segment_distance_m: 1.0,
        }
    }
}

/// Statistics over one fixed-length window of an activity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowFeature {
    pub window_start: i64,
    pub duration_s: u32,
    /// W/kg
    pub mean_relative_power: Option<f64>,
    /// Vertical ascent rate in m/h, present only on uphill windows.
    pub vam: Option<f64>,
    /// Steepest sub-segment grade in percent.
    pub max_slope: f64,
    pub mean_hr: Option<f64>,
}

/// Power per kilogram needed to lift a body at `vam` meters per hour.
pub fn gravity_relative_power(vam: f64) -> Result<f64, FeatureError> {
    if !(vam >= 0.0) {
        return Err(FeatureError::Domain(format!("vam must be nonnegative, got {vam}")));
    }
    Ok(GRAVITY * vam / 3600.0)
}

/// Sliding windows of `length_s` seconds every `stride_s` seconds.
///
/// A window starting at sample `i` averages power and heart rate over samples
/// `i..i+length` and measures ascent between the altitude fixes at `i` and
/// `i+length`, so the stream needs `length + 1` samples for one window.
pub fn window_features(stream: &ActivityStream, athlete: &AthleteProfile, opts: &WindowOptions) -> Vec<WindowFeature> {
    let n = stream.samples.len();
    let len = opts.length_s;
    if len == 0 || n <= len {
        return Vec::new();
    }
    let samples = &stream.samples;
    let has_power = stream.has_channel(Channel::Power);
    let has_hr = stream.has_channel(Channel::HeartRate);
    let altitude = altitude_track(samples);
    let smoothed = altitude.as_ref().map(|a| centered_moving_average(a, opts.smoothing_s));
    let step = horizontal_steps(samples);

    let mut out = Vec::new();
    let mut start = 0;
    while start + len < n {
        let end = start + len;
        let body = &samples[start..end];
        let mean_relative_power = has_power
            .then(|| mean(body.iter().filter_map(|s| s.power)))
            .flatten()
            .map(|p| p / athlete.body_mass);
        let mean_hr = has_hr.then(|| mean(body.iter().filter_map(|s| s.heart_rate))).flatten();

        let (vam, max_slope) = match (&altitude, &smoothed) {
            (Some(alt), Some(smooth)) => {
                let max_slope = max_segment_slope(smooth, step.as_deref(), start, end, opts);
                let gain = alt[end] - alt[start];
                let uphill = gain > 0.0
                    && (!opts.sustained_climb || rises_throughout(smooth, start, end, opts.slope_segment_s))
                    && (opts.uphill_min_slope_pct <= 0.0
                        || mean_slope(smooth, step.as_deref(), start, end)
                            .is_some_and(|g| g >= opts.uphill_min_slope_pct));
                (uphill.then(|| 3600.0 * gain / len as f64), max_slope)
            }
            _ => (None, 0.0),
        };

        out.push(WindowFeature {
            window_start: samples[start].timestamp,
            duration_s: len as u32,
            mean_relative_power,
            vam,
            max_slope,
            mean_hr,
        });
        start += opts.stride_s.max(1);
    }
    out
}

/// Highest mean relative power over any `length_s`-sample run, in W/kg.
pub fn best_window_relative_power(stream: &ActivityStream, body_mass: f64, length_s: usize) -> Option<f64> {
    if !stream.has_channel(Channel::Power) || length_s == 0 || stream.samples.len() < length_s {
        return None;
    }
    let power: Vec<f64> = stream.samples.iter().map(|s| s.power.unwrap_or(0.0)).collect();
    let mut sum: f64 = power[..length_s].iter().sum();
    let mut best = sum;
    for i in length_s..power.len() {
        sum += power[i] - power[i - length_s];
        best = best.max(sum);
    }
    Some(best / length_s as f64 / body_mass)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Altitude per sample with interior holes held at the previous value;
/// `None` when the stream has no altitude at all.
fn altitude_track(samples: &[SensorSample]) -> Option<Vec<f64>> {
    let first = samples.iter().find_map(|s| s.altitude)?;
    let mut last = first;
    Some(
        samples
            .iter()
            .map(|s| {
                if let Some(a) = s.altitude {
                    last = a;
                }
                last
            })
            .collect(),
    )
}

fn centered_moving_average(values: &[f64], width: usize) -> Vec<f64> {
    if width <= 1 {
        return values.to_vec();
    }
    let half = width / 2;
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0.0);
    for v in values {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Path length covered between sample `i` and `i + 1`, from the speed channel
/// when present, else from consecutive GPS fixes.
fn horizontal_steps(samples: &[SensorSample]) -> Option<Vec<f64>> {
    if samples.iter().any(|s| s.speed.is_some()) {
        return Some(samples.iter().map(|s| s.speed.unwrap_or(0.0)).collect());
    }
    if samples.iter().any(|s| s.latitude.is_some() && s.longitude.is_some()) {
        let mut steps = vec![0.0; samples.len()];
        let mut last: Option<(f64, f64)> = None;
        for (i, s) in samples.iter().enumerate() {
            if let (Some(lat), Some(lon)) = (s.latitude, s.longitude) {
                if let Some((plat, plon)) = last {
                    steps[i - 1] = haversine_m(plat, plon, lat, lon);
                }
                last = Some((lat, lon));
            } else {
                last = None;
            }
        }
        return Some(steps);
    }
    None
}

pub(crate) fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().asin()
}

/// Grade in percent between samples `a` and `b`, or `None` when the
/// horizontal run is too short to measure.
fn grade(smooth: &[f64], step: &[f64], a: usize, b: usize, min_run: f64) -> Option<f64> {
    let path: f64 = step[a..b].iter().sum();
    let rise = smooth[b] - smooth[a];
    let run = (path * path - rise * rise).max(0.0).sqrt();
    (run >= min_run).then(|| 100.0 * rise / run)
}

fn max_segment_slope(smooth: &[f64], step: Option<&[f64]>, start: usize, end: usize, opts: &WindowOptions) -> f64 {
    let Some(step) = step else { return 0.0 };
    let seg = opts.slope_segment_s.max(1);
    let mut best: Option<f64> = None;
    let mut a = start;
    while a < end {
        let b = (a + seg).min(end);
        if let Some(g) = grade(smooth, step, a, b, opts.min_segment_distance_m) {
            best = Some(best.map_or(g, |x: f64| x.max(g)));
        }
        a = b;
    }
    best.unwrap_or(0.0)
}

fn rises_throughout(smooth: &[f64], start: usize, end: usize, segment: usize) -> bool {
    (start..end)
        .step_by(segment.max(1))
        .all(|a| smooth[(a + segment.max(1)).min(end)] > smooth[a])
}

fn mean_slope(smooth: &[f64], step: Option<&[f64]>, start: usize, end: usize) -> Option<f64> {
    grade(smooth, step?, start, end, 1.0)
}
