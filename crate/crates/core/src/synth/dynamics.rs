use serde::{Deserialize, Serialize};

/// First-order fitness response of one athlete.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessModel {
    pub baseline: f64,
    pub gain: f64,
    pub tau_days: f64,
    pub min_vo2max: f64,
    pub max_vo2max: f64,
}

impl FitnessModel {
    /// Next day's VO2max: the day's load adds `gain·load`, and the state
    /// relaxes toward baseline with time constant `tau_days`.
    pub fn update_fitness(&self, current: f64, day_trimp: f64) -> f64 {
        let next = current + self.gain * day_trimp - (current - self.baseline) / self.tau_days;
        next.clamp(self.min_vo2max, self.max_vo2max)
    }

    /// Fixed point under a constant daily load.
    pub fn steady_state(&self, daily_load: f64) -> f64 {
        self.baseline + self.gain * daily_load * self.tau_days
    }

    /// State at day 0 that makes the trajectory exactly follow a load ramp
    /// `load(d) = start + slope·d` (the particular solution of the recurrence).
    pub fn on_ramp(&self, start: f64, slope: f64) -> f64 {
        let k = self.gain;
        let tau = self.tau_days;
        (self.baseline + k * tau * start - k * tau * tau * slope).clamp(self.min_vo2max, self.max_vo2max)
    }
}
