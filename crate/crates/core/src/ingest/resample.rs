use serde::{Deserialize, Serialize};

use super::{ActivityStream, Channel, SensorSample};
use crate::error::IngestError;

/// Channels held at their last value across short gaps. The rest of the
/// channels (power, cadence) read as zero while the sensor was silent.
const FORWARD_FILLED: [Channel; 5] = [
    Channel::HeartRate,
    Channel::Altitude,
    Channel::Latitude,
    Channel::Longitude,
    Channel::Speed,
];

fn fill_value(channel: Channel, previous: f64) -> f64 {
    if FORWARD_FILLED.contains(&channel) {
        previous
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResampleOptions {
    /// Gaps of at most this many missing seconds are filled; longer gaps split
    /// the recording.
    pub gap_split_seconds: i64,
    /// Shortest acceptable output, in seconds.
    pub min_duration_s: i64,
}

impl Default for ResampleOptions {
    fn default() -> Self {
        ResampleOptions {
            gap_split_seconds: 5,
            min_duration_s: 60,
        }
    }
}

/// A run of missing seconds between two recorded timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    /// Last timestamp before the gap.
    pub after: i64,
    /// First timestamp after the gap.
    pub before: i64,
}

impl Gap {
    pub fn missing_s(&self) -> i64 {
        self.before - self.after - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GapReport {
    /// Gaps longer than the split threshold, in recording order.
    pub split_gaps: Vec<Gap>,
    /// Row gaps short enough to be filled.
    pub filled_gaps: Vec<Gap>,
    /// Per-channel runs of empty cells that were filled.
    pub filled_cells: usize,
    pub segments: usize,
    /// Index of the segment that was kept (the longest; earliest on ties).
    pub kept_segment: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub stream: ActivityStream,
    pub report: GapReport,
}

/// Aligns a recording onto a gapless 1 Hz grid.
///
/// Short dropouts (at most `gap_split_seconds` missing seconds) are filled:
/// heart rate, altitude, position and speed hold their last value, power and
/// cadence read zero. The same rule applies to short runs of empty cells
/// inside a channel. Longer dropouts split the recording and only the longest
/// piece is returned.
pub fn resample_align(raw: &ActivityStream, opts: &ResampleOptions) -> Result<Resampled, IngestError> {
    if raw.samples.is_empty() {
        return Err(IngestError::Empty);
    }
    let mut report = GapReport::default();

    let mut segments: Vec<&[SensorSample]> = Vec::new();
    let mut seg_start = 0;
    for i in 1..raw.samples.len() {
        let gap = Gap {
            after: raw.samples[i - 1].timestamp,
            before: raw.samples[i].timestamp,
        };
        if gap.missing_s() > opts.gap_split_seconds {
            report.split_gaps.push(gap);
            segments.push(&raw.samples[seg_start..i]);
            seg_start = i;
        } else if gap.missing_s() > 0 {
            report.filled_gaps.push(gap);
        }
    }
    segments.push(&raw.samples[seg_start..]);
    report.segments = segments.len();

    let span = |seg: &[SensorSample]| seg[seg.len() - 1].timestamp - seg[0].timestamp + 1;
    let (kept, segment) = segments
        .iter()
        .enumerate()
        .fold((0, segments[0]), |best, (i, seg)| if span(seg) > span(best.1) { (i, seg) } else { best });
    report.kept_segment = kept;
    report
        .filled_gaps
        .retain(|g| g.after >= segment[0].timestamp && g.before <= segment[segment.len() - 1].timestamp);

    let seconds = span(segment);
    if seconds < opts.min_duration_s {
        return Err(IngestError::TooShort {
            seconds,
            minimum: opts.min_duration_s,
        });
    }

    let mut samples = Vec::with_capacity(seconds as usize);
    for s in segment {
        if let Some(prev) = samples.last().copied() {
            let prev: SensorSample = prev;
            for t in prev.timestamp + 1..s.timestamp {
                let mut filled = SensorSample::at(t);
                for channel in Channel::ALL {
                    filled.set(channel, prev.get(channel).map(|v| fill_value(channel, v)));
                }
                samples.push(filled);
            }
        }
        samples.push(*s);
    }

    for channel in Channel::ALL {
        report.filled_cells += fill_channel_runs(&mut samples, channel, opts.gap_split_seconds);
    }

    Ok(Resampled {
        stream: ActivityStream {
            subject_id: raw.subject_id.clone(),
            start_time: samples[0].timestamp,
            samples,
            source_device: raw.source_device,
        },
        report,
    })
}

/// Fills interior runs of empty cells no longer than `max_run`. Returns the
/// number of runs filled.
fn fill_channel_runs(samples: &mut [SensorSample], channel: Channel, max_run: i64) -> usize {
    let mut filled = 0;
    let mut last_present: Option<usize> = None;
    for i in 0..samples.len() {
        if samples[i].get(channel).is_none() {
            continue;
        }
        if let Some(p) = last_present {
            let run = (i - p - 1) as i64;
            if run > 0 && run <= max_run {
                let prev = samples[p].get(channel).unwrap_or_default();
                for s in &mut samples[p + 1..i] {
                    s.set(channel, Some(fill_value(channel, prev)));
                }
                filled += 1;
            }
        }
        last_present = Some(i);
    }
    filled
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(ts: &[i64], hr: f64) -> ActivityStream {
        let samples = ts
            .iter()
            .map(|&t| SensorSample {
                heart_rate: Some(hr),
                power: Some(150.0),
                ..SensorSample::at(t)
            })
            .collect();
        ActivityStream::new("s", 8, samples).unwrap()
    }

    fn run(ts: impl IntoIterator<Item = i64>) -> Vec<i64> {
        ts.into_iter().collect()
    }

    #[test]
    fn one_hz_input_is_a_fixed_point() {
        let s = stream(&run(0..120), 140.0);
        let out = resample_align(&s, &ResampleOptions::default()).unwrap();
        assert_eq!(out.stream, s);
        assert_eq!(out.report.segments, 1);
    }

    #[test]
    fn three_second_gap_forward_fills_heart_rate() {
        let mut ts = run(0..50);
        ts.extend(54..120);
        let out = resample_align(&stream(&ts, 140.0), &ResampleOptions::default()).unwrap();
        assert!(out.stream.is_one_hz());
        let filled: Vec<_> = out.stream.samples[50..53].iter().map(|s| s.heart_rate).collect();
        assert_eq!(filled, vec![Some(140.0); 3]);
        assert!(out.stream.samples[50..53].iter().all(|s| s.power == Some(0.0)));
        assert_eq!(out.report.filled_gaps.len(), 1);
    }

    #[test]
    fn thirty_second_gap_splits_and_keeps_longest() {
        // 100 s, 30 s hole, 200 s.
        let mut ts = run(0..100);
        ts.extend(130..330);
        let out = resample_align(&stream(&ts, 130.0), &ResampleOptions::default()).unwrap();
        assert_eq!(out.report.split_gaps.len(), 1);
        assert_eq!(out.report.split_gaps[0].missing_s(), 30);
        assert_eq!(out.report.segments, 2);
        assert_eq!(out.stream.start_time, 130);
        assert_eq!(out.stream.len(), 200);
    }

    #[test]
    fn three_segments_keep_the_middle_one() {
        // 80 s, gap 20, 150 s (with a filled 2 s hole), gap 10, 90 s.
        let mut ts = run(0..80);
        ts.extend(100..200);
        ts.extend(202..252);
        ts.extend(262..352);
        let out = resample_align(&stream(&ts, 130.0), &ResampleOptions::default()).unwrap();
        assert_eq!(out.report.segments, 3);
        assert_eq!(out.report.split_gaps.len(), 2);
        assert_eq!(out.report.kept_segment, 1);
        assert_eq!(out.stream.start_time, 100);
        assert_eq!(out.stream.len(), 152);
        assert_eq!(out.report.filled_gaps.len(), 1);
    }

    #[test]
    fn short_result_is_an_error() {
        let mut ts = run(0..40);
        ts.extend(100..150);
        let err = resample_align(&stream(&ts, 130.0), &ResampleOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::TooShort { seconds: 50, .. }));
    }

    #[test]
    fn short_runs_of_empty_cells_are_filled() {
        let mut s = stream(&run(0..100), 120.0);
        for x in &mut s.samples[10..13] {
            x.heart_rate = None;
        }
        for x in &mut s.samples[40..60] {
            x.heart_rate = None;
        }
        let out = resample_align(&s, &ResampleOptions::default()).unwrap();
        assert!(out.stream.samples[10..13].iter().all(|x| x.heart_rate == Some(120.0)));
        assert!(out.stream.samples[40..60].iter().all(|x| x.heart_rate.is_none()));
        assert_eq!(out.report.filled_cells, 1);
    }

    #[test]
    fn custom_split_threshold() {
        let mut ts = run(0..100);
        ts.extend(108..200);
        let opts = ResampleOptions {
            gap_split_seconds: 10,
            ..Default::default()
        };
        let out = resample_align(&stream(&ts, 130.0), &opts).unwrap();
        assert_eq!(out.report.segments, 1);
        assert_eq!(out.stream.len(), 200);
    }
}
