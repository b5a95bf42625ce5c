use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ActivityStream, Channel};
use crate::error::IngestError;

/// Sensor capabilities a device can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceChannel {
    Time,
    Cadence,
    HeartRate,
    Gps,
    BarometricAltitude,
    WheelSpeed,
    Power,
}

impl DeviceChannel {
    /// Sample channels this capability provides.
    pub fn provides(self) -> &'static [Channel] {
        match self {
            DeviceChannel::Time => &[],
            DeviceChannel::Cadence => &[Channel::Cadence],
            DeviceChannel::HeartRate => &[Channel::HeartRate],
            DeviceChannel::Gps => &[Channel::Latitude, Channel::Longitude, Channel::Altitude, Channel::Speed],
            DeviceChannel::BarometricAltitude => &[Channel::Altitude],
            DeviceChannel::WheelSpeed => &[Channel::Speed],
            DeviceChannel::Power => &[Channel::Power],
        }
    }

    /// Sample channels that must be present in a recording for this
    /// capability to be projected out of it.
    fn requires(self) -> &'static [Channel] {
        match self {
            DeviceChannel::Gps => &[Channel::Latitude, Channel::Longitude],
            other => other.provides(),
        }
    }
}

impl fmt::Display for DeviceChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        f.write_str(s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub device_id: u8,
    #[serde(default)]
    pub name: String,
    pub channels: BTreeSet<DeviceChannel>,
}

impl DeviceProfile {
    /// The eight reference devices.
    ///
    /// | id | device | channels |
    /// |----|--------|----------|
    /// | 1 | Timex Ironman | time |
    /// | 2 | Fitbit Flex2 | time, cadence |
    /// | 3 | Garmin VivoActive | time, cadence, gps |
    /// | 4 | Polar FT7 | time, heart rate |
    /// | 5 | Suunto Spartan | time, cadence, heart rate, gps |
    /// | 6 | Polar RCX5 | time, cadence, heart rate, barometer, wheel speed |
    /// | 7 | Garmin Edge 520 | time, cadence, heart rate, gps, barometer, wheel speed |
    /// | 8 | SRM-PC8 | everything, including power |
    pub fn builtin(device_id: u8) -> Result<DeviceProfile, IngestError> {
        use DeviceChannel::*;
        let (name, channels): (&str, &[DeviceChannel]) = match device_id {
            1 => ("Timex Ironman", &[Time]),
            2 => ("Fitbit Flex2", &[Time, Cadence]),
            3 => ("Garmin VivoActive", &[Time, Cadence, Gps]),
            4 => ("Polar FT7", &[Time, HeartRate]),
            5 => ("Suunto Spartan", &[Time, Cadence, HeartRate, Gps]),
            6 => ("Polar RCX5", &[Time, Cadence, HeartRate, BarometricAltitude, WheelSpeed]),
            7 => (
                "Garmin Edge 520",
                &[Time, Cadence, HeartRate, Gps, BarometricAltitude, WheelSpeed],
            ),
            8 => (
                "SRM-PC8",
                &[Time, Cadence, HeartRate, Gps, BarometricAltitude, WheelSpeed, Power],
            ),
            other => return Err(IngestError::UnknownDevice(other)),
        };
        Ok(DeviceProfile {
            device_id,
            name: name.to_string(),
            channels: channels.iter().copied().collect(),
        })
    }

    pub fn builtin_all() -> Vec<DeviceProfile> {
        (1..=8).map(|id| DeviceProfile::builtin(id).expect("ids 1..=8 are built in")).collect()
    }

    pub fn has(&self, channel: DeviceChannel) -> bool {
        self.channels.contains(&channel)
    }

    /// Sample channels the device can record.
    pub fn sample_channels(&self) -> BTreeSet<Channel> {
        self.channels.iter().flat_map(|c| c.provides().iter().copied()).collect()
    }
}

/// Projects a full recording onto what `profile` could have recorded.
///
/// Timestamps and every retained value are untouched. Altitude survives when
/// the profile has either GPS or a barometer; speed survives with either GPS
/// or a wheel sensor.
pub fn degrade_to_device(full: &ActivityStream, profile: &DeviceProfile) -> Result<ActivityStream, IngestError> {
    for &cap in &profile.channels {
        if let Some(&missing) = cap.requires().iter().find(|&&c| !full.has_channel(c)) {
            return Err(IngestError::MissingChannel {
                device: profile.device_id,
                channel: missing,
            });
        }
    }
    let keep = profile.sample_channels();
    let samples = full
        .samples
        .iter()
        .map(|s| {
            let mut out = *s;
            for channel in Channel::ALL {
                if !keep.contains(&channel) {
                    out.set(channel, None);
                }
            }
            out
        })
        .collect();
    Ok(ActivityStream {
        subject_id: full.subject_id.clone(),
        start_time: full.start_time,
        samples,
        source_device: profile.device_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::SensorSample;

    fn full_stream() -> ActivityStream {
        let samples = (0..10)
            .map(|t| SensorSample {
                timestamp: 1000 + t,
                power: Some(200.0 + t as f64),
                heart_rate: Some(140.0),
                cadence: Some(85.0),
                latitude: Some(34.0),
                longitude: Some(-118.0),
                altitude: Some(100.0 + t as f64),
                speed: Some(8.0),
            })
            .collect();
        ActivityStream::new("s", 8, samples).unwrap()
    }

    #[test]
    fn profiles_one_to_seven_are_strict_subsets_of_eight() {
        let all = DeviceProfile::builtin(8).unwrap();
        for id in 1..=7 {
            let p = DeviceProfile::builtin(id).unwrap();
            assert!(p.channels.is_subset(&all.channels));
            assert!(p.channels.len() < all.channels.len());
        }
        assert!(DeviceProfile::builtin(9).is_err());
    }

    #[test]
    fn heart_rate_only_device() {
        let out = degrade_to_device(&full_stream(), &DeviceProfile::builtin(4).unwrap()).unwrap();
        for s in &out.samples {
            assert_eq!(s.heart_rate, Some(140.0));
            assert!(s.power.is_none() && s.cadence.is_none() && s.altitude.is_none());
            assert!(s.latitude.is_none() && s.longitude.is_none() && s.speed.is_none());
        }
        assert_eq!(out.source_device, 4);
    }

    #[test]
    fn full_profile_is_identity() {
        let full = full_stream();
        let out = degrade_to_device(&full, &DeviceProfile::builtin(8).unwrap()).unwrap();
        assert_eq!(out, full);
    }

    #[test]
    fn time_only_device_keeps_timestamps() {
        let full = full_stream();
        let out = degrade_to_device(&full, &DeviceProfile::builtin(1).unwrap()).unwrap();
        for (a, b) in out.samples.iter().zip(&full.samples) {
            assert_eq!(*a, SensorSample::at(b.timestamp));
        }
    }

    #[test]
    fn barometer_keeps_altitude_without_gps() {
        let out = degrade_to_device(&full_stream(), &DeviceProfile::builtin(6).unwrap()).unwrap();
        assert!(out.samples.iter().all(|s| s.altitude.is_some() && s.latitude.is_none()));
        assert!(out.samples.iter().all(|s| s.speed == Some(8.0)));
    }

    #[test]
    fn missing_channel_is_an_error() {
        let hr_only = degrade_to_device(&full_stream(), &DeviceProfile::builtin(4).unwrap()).unwrap();
        let err = degrade_to_device(&hr_only, &DeviceProfile::builtin(3).unwrap()).unwrap_err();
        assert!(matches!(err, IngestError::MissingChannel { device: 3, .. }));
    }
}
