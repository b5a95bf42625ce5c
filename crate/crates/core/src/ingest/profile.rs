use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::DeviceProfile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Male,
    Female,
}

/// UTC offset in effect from `date` onward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimezoneChange {
    pub date: NaiveDate,
    pub utc_offset_hours: f64,
}

/// Survey and physiology record for one subject, stored as TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AthleteProfile {
    pub subject_id: String,
    /// kg
    pub body_mass: f64,
    /// beats/min
    pub resting_hr: f64,
    /// beats/min
    pub max_hr: f64,
    pub birth_year: i32,
    pub sex: Sex,
    pub smoker: bool,
    pub ethnicity: String,
    /// cm
    pub height: f64,
    /// cm
    pub waist: f64,
    /// 1 (lowest) ..= 7
    pub education_level: u8,
    /// 1 (lowest) ..= 9
    pub occupation_level: u8,
    #[serde(default)]
    pub timezone_history: Vec<TimezoneChange>,
}

impl AthleteProfile {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("profile {}: {msg}", self.subject_id)));
        if !(self.resting_hr < self.max_hr) {
            return bad(format!("resting_hr {} must be below max_hr {}", self.resting_hr, self.max_hr));
        }
        if !(self.body_mass > 0.0) {
            return bad(format!("body_mass {} must be positive", self.body_mass));
        }
        if !(self.height > 0.0) {
            return bad(format!("height {} must be positive", self.height));
        }
        if self.timezone_history.windows(2).any(|w| w[1].date < w[0].date) {
            return bad("timezone_history must be sorted by date".into());
        }
        Ok(())
    }

    pub fn age_on(&self, date: NaiveDate) -> f64 {
        use chrono::Datelike;
        f64::from(date.year() - self.birth_year)
    }

    /// UTC offset in effect on `date`; zero before the first recorded entry.
    pub fn utc_offset_on(&self, date: NaiveDate) -> f64 {
        self.timezone_history
            .iter()
            .take_while(|c| c.date <= date)
            .last()
            .map_or(0.0, |c| c.utc_offset_hours)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let p: AthleteProfile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::io::read_string(path)?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// A set of device profiles loaded from TOML:
///
/// ```toml
/// [[device]]
/// device_id = 9
/// name = "chest strap"
/// channels = ["time", "heart_rate"]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfileFile {
    #[serde(rename = "device")]
    pub devices: Vec<DeviceProfile>,
}

impl DeviceProfileFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let f: DeviceProfileFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut ids: Vec<u8> = f.devices.iter().map(|d| d.device_id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("duplicate device_id in device profile file".into()));
        }
        Ok(f)
    }

    pub fn get(&self, device_id: u8) -> Option<&DeviceProfile> {
        self.devices.iter().find(|d| d.device_id == device_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::DeviceChannel;

    fn sample() -> AthleteProfile {
        AthleteProfile {
            subject_id: "s01".into(),
            body_mass: 70.0,
            resting_hr: 55.0,
            max_hr: 190.0,
            birth_year: 1985,
            sex: Sex::Male,
            smoker: false,
            ethnicity: "white".into(),
            height: 178.0,
            waist: 82.0,
            education_level: 5,
            occupation_level: 7,
            timezone_history: vec![
                TimezoneChange {
                    date: NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(),
                    utc_offset_hours: -8.0,
                },
                TimezoneChange {
                    date: NaiveDate::from_ymd_opt(2019, 3, 1).unwrap(),
                    utc_offset_hours: -5.0,
                },
            ],
        }
    }

    #[test]
    fn toml_round_trip() {
        let p = sample();
        let text = p.to_toml_string().unwrap();
        assert_eq!(AthleteProfile::from_toml_str(&text).unwrap(), p);
    }

    #[test]
    fn offsets_follow_history() {
        let p = sample();
        assert_eq!(p.utc_offset_on(NaiveDate::from_ymd_opt(2018, 12, 1).unwrap()), 0.0);
        assert_eq!(p.utc_offset_on(NaiveDate::from_ymd_opt(2019, 2, 1).unwrap()), -8.0);
        assert_eq!(p.utc_offset_on(NaiveDate::from_ymd_opt(2019, 3, 1).unwrap()), -5.0);
    }

    #[test]
    fn resting_above_max_rejected() {
        let mut p = sample();
        p.resting_hr = 200.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn device_file_parses() {
        let f = DeviceProfileFile::from_toml_str(
            "[[device]]\ndevice_id = 9\nname = \"strap\"\nchannels = [\"time\", \"heart_rate\"]\n",
        )
        .unwrap();
        assert!(f.get(9).unwrap().has(DeviceChannel::HeartRate));
    }
}
