use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fitness dynamics and its spread across subjects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitnessConfig {
    /// Decay time constant toward baseline, days.
    pub tau_days: f64,
    /// Untrained VO2max, mL/kg/min.
    pub baseline_mean: f64,
    pub baseline_sd: f64,
    /// VO2max gained per unit of daily load.
    pub gain_mean: f64,
    /// Relative spread of the gain.
    pub gain_sd_frac: f64,
    /// Daily disturbance of VO2max not explained by load (illness, sleep,
    /// heat), mL/kg/min.
    pub process_sd: f64,
    pub min_vo2max: f64,
    pub max_vo2max: f64,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        FitnessConfig {
            tau_days: 42.0,
            baseline_mean: 42.0,
            baseline_sd: 2.0,
            gain_mean: 0.0035,
            gain_sd_frac: 0.15,
            process_sd: 0.6,
            min_vo2max: 20.0,
            max_vo2max: 90.0,
        }
    }
}

/// Daily training schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleConfig {
    /// Mean daily load at mid-period, TRIMP units; spread across subjects.
    pub load_mean: f64,
    pub load_sd: f64,
    /// Daily load change, TRIMP units per day; spread across subjects.
    pub trend_mean: f64,
    pub trend_sd: f64,
    /// Relative day-to-day variation of the load.
    pub day_load_sd_frac: f64,
    pub rest_day_prob: f64,
    /// Range of the per-subject habitual start hour (local time).
    pub start_hour_min: f64,
    pub start_hour_max: f64,
    /// Day-to-day start time variation, minutes; per-subject values are
    /// drawn up to this bound.
    pub start_sd_max_min: f64,
    /// Probability per day of a timezone change (travel).
    pub travel_prob: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            load_mean: 80.0,
            load_sd: 15.0,
            trend_mean: 0.25,
            trend_sd: 0.12,
            day_load_sd_frac: 0.25,
            rest_day_prob: 0.15,
            start_hour_min: 6.0,
            start_hour_max: 18.0,
            start_sd_max_min: 60.0,
            travel_prob: 0.01,
        }
    }
}

/// Structure of a single ride, as fractions of the rider's maximal 4-minute
/// power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EffortConfig {
    pub warmup_s: u32,
    pub max_effort_s: u32,
    pub endurance_fraction_mean: f64,
    pub endurance_fraction_sd: f64,
    /// Probability that the maximal effort is ridden on a climb.
    pub effort_on_climb_prob: f64,
    pub max_ride_s: u32,
}

impl Default for EffortConfig {
    fn default() -> Self {
        EffortConfig {
            warmup_s: 600,
            max_effort_s: 300,
            endurance_fraction_mean: 0.6,
            endurance_fraction_sd: 0.05,
            effort_on_climb_prob: 0.95,
            max_ride_s: 5 * 3600,
        }
    }
}

/// Heart-rate response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeartConfig {
    /// Heart-rate reserve fraction reached at maximal power for a nominal
    /// responder.
    pub reserve_at_max: f64,
    /// Personal response factor is uniform in `1 ± response_spread`.
    pub response_spread: f64,
    /// First-order heart-rate kinetics, seconds.
    pub lag_s: f64,
    /// Cardiac drift, reserve percentage points per hour of riding; per-subject
    /// values are uniform in `[0, drift_max]`.
    pub drift_max_pct_per_h: f64,
    /// Measurement noise, beats/min.
    pub noise_bpm: f64,
}

impl Default for HeartConfig {
    fn default() -> Self {
        HeartConfig {
            reserve_at_max: 0.8,
            response_spread: 0.2,
            lag_s: 25.0,
            drift_max_pct_per_h: 6.0,
            noise_bpm: 1.5,
        }
    }
}

/// Terrain and the non-gravity resistance that separates measured power
/// from climbing power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RouteConfig {
    pub segment_min_s: u32,
    pub segment_max_s: u32,
    pub climb_prob: f64,
    pub descent_prob: f64,
    /// Climb grades are uniform in this range, percent.
    pub grade_min: f64,
    pub grade_max: f64,
    /// Mean and across-subject spread of rolling/aero loss at 0% grade, W/kg.
    pub resistance_mean: f64,
    pub resistance_sd: f64,
    /// Wind noise at 0% grade, W/kg (stationary standard deviation).
    pub wind_scale: f64,
    /// Per-second autocorrelation of the wind process.
    pub wind_ar: f64,
    /// Loss shrinks with grade as `1 / (1 + grade / slope_halving_pct)`.
    pub slope_halving_pct: f64,
    /// Altitude measurement noise, m.
    pub altitude_noise_m: f64,
}

impl Default for RouteConfig {
    fn default() -> Self {
        RouteConfig {
            segment_min_s: 180,
            segment_max_s: 720,
            climb_prob: 0.6,
            descent_prob: 0.15,
            grade_min: 0.5,
            grade_max: 12.0,
            resistance_mean: 0.6,
            resistance_sd: 0.65,
            wind_scale: 0.5,
            wind_ar: 0.995,
            slope_halving_pct: 2.0,
            altitude_noise_m: 0.0,
        }
    }
}

/// Full simulator configuration. Every output is a pure function of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_subjects: usize,
    pub days: u32,
    pub seed: u64,
    pub start_date: NaiveDate,
    pub fitness: FitnessConfig,
    pub schedule: ScheduleConfig,
    pub effort: EffortConfig,
    pub heart: HeartConfig,
    pub route: RouteConfig,
    /// Degraded devices assigned round-robin; device 8 copies are always kept.
    pub devices: Vec<u8>,
    /// Start the fitness trajectory on its trend line instead of at baseline.
    pub start_on_trend: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_subjects: 24,
            days: 120,
            seed: 7,
            start_date: NaiveDate::from_ymd_opt(2023, 1, 2).expect("valid date"),
            fitness: FitnessConfig::default(),
            schedule: ScheduleConfig::default(),
            effort: EffortConfig::default(),
            heart: HeartConfig::default(),
            route: RouteConfig::default(),
            devices: (1..=7).collect(),
            start_on_trend: true,
        }
    }
}

impl SynthConfig {
    /// Every noise source off: identical physiology across subjects apart
    /// from load level, climbs only, no wind or resistance, no rest days.
    pub fn noiseless() -> Self {
        let d = SynthConfig::default();
        SynthConfig {
            fitness: FitnessConfig {
                baseline_sd: 0.0,
                gain_sd_frac: 0.0,
                process_sd: 0.0,
                ..d.fitness
            },
            schedule: ScheduleConfig {
                trend_sd: 0.0,
                day_load_sd_frac: 0.0,
                rest_day_prob: 0.0,
                ..d.schedule
            },
            effort: EffortConfig {
                endurance_fraction_sd: 0.0,
                effort_on_climb_prob: 1.0,
                ..d.effort
            },
            heart: HeartConfig {
                response_spread: 0.0,
                lag_s: 0.0,
                drift_max_pct_per_h: 0.0,
                noise_bpm: 0.0,
                ..d.heart
            },
            route: RouteConfig {
                climb_prob: 1.0,
                descent_prob: 0.0,
                grade_min: 3.0,
                resistance_mean: 0.0,
                resistance_sd: 0.0,
                wind_scale: 0.0,
                altitude_noise_m: 0.0,
                ..d.route
            },
            ..d
        }
    }

    /// No long-term trend: each athlete trains around a constant load and
    /// starts at the matching steady state.
    pub fn stationary() -> Self {
        let d = SynthConfig::default();
        SynthConfig {
            schedule: ScheduleConfig {
                trend_mean: 0.0,
                trend_sd: 0.0,
                ..d.schedule
            },
            ..d
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("synth config: {m}")));
        if self.n_subjects == 0 {
            return bad("n_subjects must be positive");
        }
        if self.days == 0 {
            return bad("days must be positive");
        }
        if !(self.fitness.tau_days >= 1.0) {
            return bad("fitness.tau_days must be at least 1");
        }
        if !(self.fitness.process_sd >= 0.0) {
            return bad("fitness.process_sd must be nonnegative");
        }
        if !(self.fitness.min_vo2max < self.fitness.max_vo2max) {
            return bad("fitness.min_vo2max must be below max_vo2max");
        }
        for (name, p) in [
            ("schedule.rest_day_prob", self.schedule.rest_day_prob),
            ("schedule.travel_prob", self.schedule.travel_prob),
            ("effort.effort_on_climb_prob", self.effort.effort_on_climb_prob),
            ("route.climb_prob", self.route.climb_prob),
            ("route.descent_prob", self.route.descent_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} must be a probability"));
            }
        }
        if self.route.climb_prob + self.route.descent_prob > 1.0 {
            return bad("route.climb_prob + route.descent_prob must not exceed 1");
        }
        if !(0.0 < self.route.grade_min && self.route.grade_min <= self.route.grade_max) {
            return bad("route grades must satisfy 0 < grade_min <= grade_max");
        }
        if self.route.segment_min_s == 0 || self.route.segment_min_s > self.route.segment_max_s {
            return bad("route segment bounds must satisfy 0 < min <= max");
        }
        if !(0.0..1.0).contains(&self.route.wind_ar) {
            return bad("route.wind_ar must be in [0, 1)");
        }
        if !(0.0 < self.effort.endurance_fraction_mean && self.effort.endurance_fraction_mean < 1.0) {
            return bad("effort.endurance_fraction_mean must be in (0, 1)");
        }
        if self.effort.max_effort_s < 240 {
            return bad("effort.max_effort_s must cover a 4-minute window");
        }
        if !(self.heart.reserve_at_max * (1.0 + self.heart.response_spread) <= 1.0) {
            return bad("heart.reserve_at_max * (1 + response_spread) must not exceed 1");
        }
        if self.devices.iter().any(|d| !(1..=8).contains(d)) {
            return bad("devices must be ids 1..=8");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        SynthConfig::default().validate().unwrap();
        SynthConfig::noiseless().validate().unwrap();
        SynthConfig::stationary().validate().unwrap();
    }

    #[test]
    fn toml_round_trip_with_defaults() {
        let c: SynthConfig = toml::from_str("n_subjects = 3\n[route]\nwind_scale = 0.1\n").unwrap();
        assert_eq!(c.n_subjects, 3);
        assert_eq!(c.route.wind_scale, 0.1);
        assert_eq!(c.route.grade_max, RouteConfig::default().grade_max);
        let text = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<SynthConfig>(&text).unwrap(), c);
    }
}
