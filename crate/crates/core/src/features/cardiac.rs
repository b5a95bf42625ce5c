//! Heart-rate recovery, heart-rate drift and a stroke-volume proxy.

use serde::{Deserialize, Serialize};

use crate::ingest::{ActivityStream, AthleteProfile, Channel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CardiacOptions {
    /// Length of the effort intervals and of the recovery lag, seconds.
    pub recovery_interval_s: usize,
    /// Fraction of intervals counted as peak effort.
    pub recovery_top_fraction: f64,
    /// Shortest steady-power segment for drift, seconds.
    pub drift_min_segment_s: usize,
    /// Largest power coefficient of variation that still counts as steady.
    pub drift_max_cv: f64,
    /// Arteriovenous O2 difference, mL O2 per mL blood.
    pub av_o2_difference: f64,
}

impl Default for CardiacOptions {
    fn default() -> Self {
        CardiacOptions {
            recovery_interval_s: 60,
            recovery_top_fraction: 0.1,
            drift_min_segment_s: 1200,
            drift_max_cv: 0.10,
            av_o2_difference: 0.17,
        }
    }
}

/// Heart-rate drop over the interval following the last peak effort.
///
/// Effort is the trailing interval mean of power, or of heart rate when the
/// stream has no power. Intervals in the top decile are peak effort; the last
/// one that still has a full interval of recording after it is used.
pub fn hr_recovery(stream: &ActivityStream, opts: &CardiacOptions) -> Option<f64> {
    let lag = opts.recovery_interval_s;
    let n = stream.samples.len();
    if lag == 0 || n < 2 * lag || !stream.has_channel(Channel::HeartRate) {
        return None;
    }
    let channel = if stream.has_channel(Channel::Power) {
        Channel::Power
    } else {
        Channel::HeartRate
    };
    let effort: Vec<f64> = stream.samples.iter().map(|s| s.get(channel).unwrap_or(0.0)).collect();

    // rolling[j] is the mean over samples j+1-lag ..= j, for j >= lag-1.
    let mut rolling = Vec::with_capacity(n - lag + 1);
    let mut sum: f64 = effort[..lag].iter().sum();
    rolling.push(sum / lag as f64);
    for j in lag..n {
        sum += effort[j] - effort[j - lag];
        rolling.push(sum / lag as f64);
    }

    let mut sorted = rolling.clone();
    sorted.sort_by(f64::total_cmp);
    let rank = ((1.0 - opts.recovery_top_fraction) * sorted.len() as f64).ceil() as usize;
    let threshold = sorted[rank.saturating_sub(1).min(sorted.len() - 1)];
    let tolerance = 1e-9 * threshold.abs().max(1.0);

    let end = (0..rolling.len())
        .rev()
        .map(|k| k + lag - 1)
        .filter(|&e| e + lag < n)
        .find(|&e| rolling[e + 1 - lag] >= threshold - tolerance)?;
    let at_end = stream.samples[end].heart_rate?;
    let later = stream.samples[end + lag].heart_rate?;
    Some(at_end - later)
}

/// Heart-rate drift in percent per hour over the longest steady-power
/// segment: the relative rise of mean heart rate from the first half of the
/// segment to the second, divided by the time between the half midpoints.
pub fn hr_drift(stream: &ActivityStream, opts: &CardiacOptions) -> Option<f64> {
    if !stream.has_channel(Channel::Power) || !stream.has_channel(Channel::HeartRate) {
        return None;
    }
    let (start, end) = steady_power_segment(stream, opts)?;
    let mid = start + (end - start) / 2;
    let mean_hr = |a: usize, b: usize| {
        let (s, n) = stream.samples[a..b]
            .iter()
            .filter_map(|x| x.heart_rate)
            .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        (n > 0).then(|| s / n as f64)
    };
    let first = mean_hr(start, mid)?;
    let second = mean_hr(mid, end)?;
    if first <= 0.0 {
        return None;
    }
    let half_hours = (end - start) as f64 / 3600.0 / 2.0;
    Some(100.0 * (second - first) / first / half_hours)
}

/// Longest run of whole minutes whose per-second power has a coefficient of
/// variation under the limit. Earliest wins ties. Returns sample indices.
fn steady_power_segment(stream: &ActivityStream, opts: &CardiacOptions) -> Option<(usize, usize)> {
    let minutes = stream.samples.len() / 60;
    let min_minutes = opts.drift_min_segment_s.div_ceil(60);
    if minutes < min_minutes || min_minutes == 0 {
        return None;
    }
    let mut s1 = vec![0.0; minutes + 1];
    let mut s2 = vec![0.0; minutes + 1];
    for m in 0..minutes {
        let (a, b) = stream.samples[m * 60..(m + 1) * 60]
            .iter()
            .map(|s| s.power.unwrap_or(0.0))
            .fold((0.0, 0.0), |(a, b), p| (a + p, b + p * p));
        s1[m + 1] = s1[m] + a;
        s2[m + 1] = s2[m] + b;
    }
    let steady = |a: usize, b: usize| {
        let n = ((b - a) * 60) as f64;
        let mean = (s1[b] - s1[a]) / n;
        if mean <= 0.0 {
            return false;
        }
        let var = ((s2[b] - s2[a]) / n - mean * mean).max(0.0);
        var.sqrt() / mean < opts.drift_max_cv
    };
    let mut best: Option<(usize, usize)> = None;
    for a in 0..minutes {
        for b in (a + min_minutes..=minutes).rev() {
            if best.is_some_and(|(x, y)| b - a <= y - x) {
                break;
            }
            if steady(a, b) {
                best = Some((a, b));
                break;
            }
        }
    }
    best.map(|(a, b)| (a * 60, b * 60))
}

/// Stroke volume estimated from oxygen pulse: VO2max times body mass per
/// maximal heartbeat, divided by the arteriovenous O2 difference. mL/beat.
pub fn stroke_volume_proxy(vo2max: f64, athlete: &AthleteProfile, opts: &CardiacOptions) -> f64 {
    let o2_pulse = vo2max * athlete.body_mass / athlete.max_hr;
    o2_pulse / opts.av_o2_difference
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::load::tests::athlete;
    use crate::ingest::SensorSample;

    fn stream(n: usize, f: impl Fn(usize) -> (Option<f64>, Option<f64>)) -> ActivityStream {
        let samples = (0..n)
            .map(|i| {
                let (power, hr) = f(i);
                SensorSample {
                    power,
                    heart_rate: hr,
                    ..SensorSample::at(i as i64)
                }
            })
            .collect();
        ActivityStream::new("s", 8, samples).unwrap()
    }

    #[test]
    fn recovery_from_step_drop() {
        // 300 s effort at 180 bpm, then 120 bpm.
        let s = stream(900, |i| {
            if (300..600).contains(&i) {
                (Some(350.0), Some(180.0))
            } else {
                (Some(150.0), Some(120.0))
            }
        });
        assert_eq!(hr_recovery(&s, &CardiacOptions::default()), Some(60.0));
    }

    #[test]
    fn recovery_constant_heart_rate_is_zero() {
        let s = stream(600, |_| (None, Some(150.0)));
        assert_eq!(hr_recovery(&s, &CardiacOptions::default()), Some(0.0));
    }

    #[test]
    fn recovery_exponential_decay() {
        // Effort ends at sample 599; afterwards HR(t) = 120 + 60 exp(-t/30).
        let s = stream(1000, |i| {
            if (300..600).contains(&i) {
                (Some(350.0), Some(180.0))
            } else if i >= 600 {
                let t = (i - 599) as f64;
                (Some(120.0), Some(120.0 + 60.0 * (-t / 30.0).exp()))
            } else {
                (Some(150.0), Some(130.0))
            }
        });
        let expected = 180.0 - (120.0 + 60.0 * (-2.0f64).exp());
        let got = hr_recovery(&s, &CardiacOptions::default()).unwrap();
        assert!((got - expected).abs() < 1e-9, "{got}");
        assert!((got - 51.88).abs() < 0.01);
    }

    #[test]
    fn recovery_needs_trailing_recording() {
        let s = stream(90, |_| (None, Some(150.0)));
        assert_eq!(hr_recovery(&s, &CardiacOptions::default()), None);
    }

    #[test]
    fn drift_forty_minutes_140_to_147() {
        let s = stream(2400, |i| (Some(200.0), Some(if i < 1200 { 140.0 } else { 147.0 })));
        let d = hr_drift(&s, &CardiacOptions::default()).unwrap();
        assert!((d - 15.0).abs() < 1e-9, "{d}");
    }

    #[test]
    fn drift_negative_and_zero() {
        let s = stream(2400, |i| (Some(200.0), Some(if i < 1200 { 150.0 } else { 147.0 })));
        assert!((hr_drift(&s, &CardiacOptions::default()).unwrap() + 6.0).abs() < 1e-9);
        let flat = stream(2400, |_| (Some(200.0), Some(150.0)));
        assert_eq!(hr_drift(&flat, &CardiacOptions::default()), Some(0.0));
    }

    #[test]
    fn drift_needs_steady_segment() {
        // Power alternates 100/300 W every 30 s: CV 0.5.
        let s = stream(3600, |i| (Some(if (i / 30) % 2 == 0 { 100.0 } else { 300.0 }), Some(140.0)));
        assert_eq!(hr_drift(&s, &CardiacOptions::default()), None);
        let short = stream(600, |_| (Some(200.0), Some(140.0)));
        assert_eq!(hr_drift(&short, &CardiacOptions::default()), None);
    }

    #[test]
    fn drift_uses_longest_steady_block() {
        // 10 min at 100 W, then 30 min at 250 W with HR rising linearly.
        let s = stream(2400, |i| {
            if i < 600 {
                (Some(100.0), Some(110.0))
            } else {
                (Some(250.0), Some(150.0 + (i - 600) as f64 * 0.005))
            }
        });
        let d = hr_drift(&s, &CardiacOptions::default()).unwrap();
        // Halves of 900 s: mean HR 152.2475 and 156.7475.
        let expected = 100.0 * 4.5 / 152.2475 / 0.25;
        assert!((d - expected).abs() < 1e-6, "{d} vs {expected}");
    }

    #[test]
    fn stroke_volume_examples() {
        let opts = CardiacOptions::default();
        let a = athlete(60.0, 190.0);
        let sv = stroke_volume_proxy(50.2, &a, &opts);
        assert!((50.2_f64 * 70.0 / 190.0 - 18.494736842).abs() < 1e-6);
        assert!((sv - 108.792569659).abs() < 1e-6, "{sv}");
        let mut heavy = a.clone();
        heavy.body_mass *= 2.0;
        assert!((stroke_volume_proxy(50.2, &heavy, &opts) - 2.0 * sv).abs() < 1e-9);
        assert_eq!(stroke_volume_proxy(0.0, &a, &opts), 0.0);
    }
}
