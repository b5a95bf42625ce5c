//! Activity ingestion: the canonical per-second CSV format, 1 Hz alignment
//! with gap handling, and projection of full recordings onto the channel set
//! of a weaker device.

mod csv_format;
mod device;
mod profile;
mod resample;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::IngestError;

pub use csv_format::{parse_activity_file, read_activity, write_activity, write_activity_file, CANONICAL_HEADER};
pub use device::{degrade_to_device, DeviceChannel, DeviceProfile};
pub use profile::{AthleteProfile, DeviceProfileFile, Sex, TimezoneChange};
pub use resample::{resample_align, Gap, GapReport, ResampleOptions, Resampled};

/// Sample-level data channels of the canonical format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Power,
    HeartRate,
    Cadence,
    Latitude,
    Longitude,
    Altitude,
    Speed,
}

impl Channel {
    pub const ALL: [Channel; 7] = [
        Channel::Power,
        Channel::HeartRate,
        Channel::Cadence,
        Channel::Latitude,
        Channel::Longitude,
        Channel::Altitude,
        Channel::Speed,
    ];

    /// Physiological or mechanical validity range, if the channel has one.
    pub fn valid_range(self) -> Option<(f64, f64)> {
        match self {
            Channel::HeartRate => Some((20.0, 250.0)),
            Channel::Cadence => Some((0.0, 250.0)),
            Channel::Power => Some((0.0, 3000.0)),
            Channel::Latitude => Some((-90.0, 90.0)),
            Channel::Longitude => Some((-180.0, 180.0)),
            _ => None,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Channel::Power => "power",
            Channel::HeartRate => "heart_rate",
            Channel::Cadence => "cadence",
            Channel::Latitude => "latitude",
            Channel::Longitude => "longitude",
            Channel::Altitude => "altitude",
            Channel::Speed => "speed",
        };
        f.write_str(name)
    }
}

/// One row of a recording. Channels a device does not carry are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorSample {
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: i64,
    /// Watts.
    pub power: Option<f64>,
    /// Beats per minute.
    pub heart_rate: Option<f64>,
    /// Revolutions per minute.
    pub cadence: Option<f64>,
    /// Degrees.
    pub latitude: Option<f64>,
    /// Degrees.
    pub longitude: Option<f64>,
    /// Meters.
    pub altitude: Option<f64>,
    /// Meters per second.
    pub speed: Option<f64>,
}

impl SensorSample {
    pub fn at(timestamp: i64) -> Self {
        SensorSample {
            timestamp,
            ..Default::default()
        }
    }

    pub fn get(&self, channel: Channel) -> Option<f64> {
        match channel {
            Channel::Power => self.power,
            Channel::HeartRate => self.heart_rate,
            Channel::Cadence => self.cadence,
            Channel::Latitude => self.latitude,
            Channel::Longitude => self.longitude,
            Channel::Altitude => self.altitude,
            Channel::Speed => self.speed,
        }
    }

    pub fn set(&mut self, channel: Channel, value: Option<f64>) {
        let slot = match channel {
            Channel::Power => &mut self.power,
            Channel::HeartRate => &mut self.heart_rate,
            Channel::Cadence => &mut self.cadence,
            Channel::Latitude => &mut self.latitude,
            Channel::Longitude => &mut self.longitude,
            Channel::Altitude => &mut self.altitude,
            Channel::Speed => &mut self.speed,
        };
        *slot = value;
    }
}

/// A single exercise session.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityStream {
    pub subject_id: String,
    pub start_time: i64,
    pub samples: Vec<SensorSample>,
    pub source_device: u8,
}

impl ActivityStream {
    /// Builds a stream, checking the sample invariants.
    pub fn new(
        subject_id: impl Into<String>,
        source_device: u8,
        samples: Vec<SensorSample>,
    ) -> Result<Self, IngestError> {
        validate_samples(&samples)?;
        Ok(ActivityStream {
            subject_id: subject_id.into(),
            start_time: samples[0].timestamp,
            samples,
            source_device,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Wall-clock span in seconds (last timestamp minus first, plus one sample).
    pub fn duration_s(&self) -> i64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.timestamp - a.timestamp + 1,
            _ => 0,
        }
    }

    pub fn has_channel(&self, channel: Channel) -> bool {
        self.samples.iter().any(|s| s.get(channel).is_some())
    }

    /// Fraction of samples carrying the channel.
    pub fn coverage(&self, channel: Channel) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let present = self.samples.iter().filter(|s| s.get(channel).is_some()).count();
        present as f64 / self.samples.len() as f64
    }

    pub fn is_one_hz(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].timestamp - w[0].timestamp == 1)
    }

    /// Appends another stream recorded after this one.
    pub fn concat(&self, other: &ActivityStream) -> Result<ActivityStream, IngestError> {
        let mut samples = self.samples.clone();
        samples.extend_from_slice(&other.samples);
        ActivityStream::new(self.subject_id.clone(), self.source_device, samples)
    }
}

/// Checks non-emptiness, strictly increasing timestamps, and channel ranges.
/// Row numbers in errors are 1-based data rows.
pub(crate) fn validate_samples(samples: &[SensorSample]) -> Result<(), IngestError> {
    if samples.is_empty() {
        return Err(IngestError::Empty);
    }
    for (i, s) in samples.iter().enumerate() {
        if i > 0 && s.timestamp <= samples[i - 1].timestamp {
            return Err(IngestError::NonMonotonic {
                row: i + 1,
                timestamp: s.timestamp,
                previous: samples[i - 1].timestamp,
            });
        }
        for channel in Channel::ALL {
            let (Some(value), Some((min, max))) = (s.get(channel), channel.valid_range()) else {
                continue;
            };
            if !(min..=max).contains(&value) {
                return Err(IngestError::OutOfRange {
                    row: i + 1,
                    channel,
                    value,
                    min,
                    max,
                });
            }
        }
    }
    Ok(())
}
