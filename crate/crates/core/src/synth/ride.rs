//! One simulated ride: route, power schedule, climbing physics and heart rate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::{RouteConfig, SynthConfig};
use super::SubjectTraits;
use crate::features::{trimp_series, TrimpParams, GRAVITY};
use crate::ingest::{ActivityStream, AthleteProfile, SensorSample};

/// Aerodynamic constant on flat ground, W/(m/s)³.
const FLAT_DRAG: f64 = 0.25;
const COAST_SPEED_MPS: f64 = 12.0;
const METERS_PER_DEGREE: f64 = 111_320.0;

pub(crate) fn gauss<R: Rng>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + sd * z
}

fn round_to(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}

/// Constant-grade stretch of road. Negative grades are descents, coasted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteSegment {
    pub duration_s: u32,
    pub grade_pct: f64,
    /// Heading in radians, clockwise from north.
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Route {
    pub segments: Vec<RouteSegment>,
}

impl Route {
    pub fn duration_s(&self) -> u32 {
        self.segments.iter().map(|s| s.duration_s).sum()
    }

    /// Per-second (grade, heading).
    fn per_second(&self) -> Vec<(f64, f64)> {
        self.segments
            .iter()
            .flat_map(|s| std::iter::repeat_n((s.grade_pct, s.heading), s.duration_s as usize))
            .collect()
    }

    /// Random terrain of the given length. The interval `effort` (start, end)
    /// is forced onto a single climb when `effort_on_climb`, else onto flat.
    pub fn generate<R: Rng>(cfg: &RouteConfig, duration_s: u32, effort: (u32, u32), effort_on_climb: bool, rng: &mut R) -> Route {
        let mut segments = Vec::new();
        let mut t = 0;
        let draw_grade = |rng: &mut R| {
            let u: f64 = rng.random();
            let g = rng.random_range(cfg.grade_min..=cfg.grade_max);
            if u < cfg.climb_prob {
                g
            } else if u < cfg.climb_prob + cfg.descent_prob {
                -g
            } else {
                0.0
            }
        };
        while t < duration_s {
            let heading = rng.random_range(0.0..std::f64::consts::TAU);
            let (len, grade) = if t == effort.0 {
                let tail = rng.random_range(0..=cfg.segment_min_s);
                let grade = if effort_on_climb {
                    rng.random_range(cfg.grade_min..=cfg.grade_max)
                } else {
                    0.0
                };
                (effort.1 - effort.0 + tail, grade)
            } else {
                let len = rng.random_range(cfg.segment_min_s..=cfg.segment_max_s);
                let len = if t < effort.0 { len.min(effort.0 - t) } else { len };
                (len, draw_grade(rng))
            };
            let len = len.min(duration_s - t);
            segments.push(RouteSegment {
                duration_s: len,
                grade_pct: grade,
                heading,
            });
            t += len;
        }
        Route { segments }
    }

    /// Keeps the first `duration_s` seconds.
    pub fn truncate(&mut self, duration_s: u32) {
        let mut left = duration_s;
        self.segments.retain_mut(|s| {
            if left == 0 {
                return false;
            }
            s.duration_s = s.duration_s.min(left);
            left -= s.duration_s;
            true
        });
    }
}

/// Everything that fixes a ride apart from terrain.
#[derive(Debug, Clone, Copy)]
pub struct RideInput<'a> {
    pub athlete: &'a AthleteProfile,
    pub traits: &'a SubjectTraits,
    /// Current VO2max; sets the maximal 4-minute power.
    pub vo2max: f64,
    pub start_time: i64,
    /// Start position: latitude, longitude, altitude.
    pub origin: (f64, f64, f64),
    /// Training load the ride should produce, TRIMP units.
    pub target_load: f64,
}

#[derive(Debug, Clone)]
pub struct Ride {
    /// Complete device-8 stream.
    pub stream: ActivityStream,
    /// Training load under a nominal heart-rate response (no personal
    /// factor, lag, drift or noise). Drives the fitness dynamics.
    pub nominal_load: f64,
}

/// Maximal 4-minute power in watts, as recorded (0.1 W resolution).
pub fn max_power_w(vo2max: f64, body_mass: f64) -> f64 {
    let rel = crate::estimators::Conversion::default().to_relative_power(vo2max).max(0.5);
    round_to(rel * body_mass, 0.1)
}

/// Target fraction of maximal power at second `t`.
fn effort_fraction(t: u32, endurance: f64, cfg: &SynthConfig) -> f64 {
    let w = cfg.effort.warmup_s;
    if (w..w + cfg.effort.max_effort_s).contains(&t) {
        1.0
    } else {
        endurance
    }
}

/// Chooses terrain and ride length so the nominal load reaches the target.
pub fn plan_route<R: Rng>(input: &RideInput<'_>, cfg: &SynthConfig, rng: &mut R) -> Route {
    let e = &cfg.effort;
    let effort = (e.warmup_s, e.warmup_s + e.max_effort_s);
    let on_climb = rng.random_bool(e.effort_on_climb_prob);
    let mut route = Route::generate(&cfg.route, e.max_ride_s, effort, on_climb, rng);
    let params = TrimpParams::default();
    let min_len = effort.1 + 120;
    let mut load = 0.0;
    let mut len = e.max_ride_s;
    for (t, (grade, _)) in route.per_second().into_iter().enumerate() {
        let t = t as u32;
        let phi = if grade < 0.0 {
            0.0
        } else {
            effort_fraction(t, input.traits.endurance_fraction, cfg)
        };
        load += params.per_minute(cfg.heart.reserve_at_max * phi) / 60.0;
        if t + 1 >= min_len && load >= input.target_load {
            len = t + 1;
            break;
        }
    }
    route.truncate(len);
    route
}

/// Renders the ride second by second. `seed` drives wind, heart-rate and
/// altitude noise.
pub fn simulate_activity(input: &RideInput<'_>, route: &Route, cfg: &SynthConfig, seed: u64) -> Ride {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = input.athlete;
    let tr = input.traits;
    let rc = &cfg.route;
    let hc = &cfg.heart;
    let mass = a.body_mass;
    let p_max = max_power_w(input.vo2max, mass);
    let reserve = a.max_hr - a.resting_hr;
    let hr_alpha = if hc.lag_s > 0.0 { 1.0 - (-1.0 / hc.lag_s).exp() } else { 1.0 };
    let wind_innov = (1.0 - rc.wind_ar * rc.wind_ar).sqrt() * rc.wind_scale;

    let (mut lat, mut lon, mut alt) = input.origin;
    let mut wind = gauss(&mut rng, 0.0, rc.wind_scale);
    let mut hr = a.resting_hr;
    let terrain = route.per_second();
    let mut samples = Vec::with_capacity(terrain.len());
    let mut nominal_hr = Vec::with_capacity(terrain.len());

    for (t, &(grade, heading)) in terrain.iter().enumerate() {
        let coasting = grade < 0.0;
        let power = if coasting {
            0.0
        } else {
            round_to(effort_fraction(t as u32, tr.endurance_fraction, cfg) * p_max, 0.1)
        };
        let rel = power / mass;
        let theta = (grade / 100.0).atan();
        let loss = (tr.resistance + wind) / (1.0 + grade.max(0.0) / rc.slope_halving_pct);
        let (speed, vz) = if coasting {
            (COAST_SPEED_MPS, COAST_SPEED_MPS * theta.sin())
        } else if grade > 0.0 {
            let vz = (rel - loss).max(0.05 * rel).max(0.01) / GRAVITY;
            (vz / theta.sin(), vz)
        } else {
            let p = (power - mass * loss).max(0.05 * power).max(1.0);
            ((p / FLAT_DRAG).cbrt(), 0.0)
        };

        let phi = rel * mass / p_max;
        let elapsed_h = t as f64 / 3600.0;
        let frac = (hc.reserve_at_max * tr.hr_response * phi + tr.hr_drift_pct_per_h / 100.0 * elapsed_h).clamp(0.0, 1.0);
        hr += (a.resting_hr + reserve * frac - hr) * hr_alpha;
        nominal_hr.push(a.resting_hr + reserve * (hc.reserve_at_max * phi).clamp(0.0, 1.0));
        let measured_hr = round_to(gauss(&mut rng, hr, hc.noise_bpm), 0.1).clamp(20.0, 250.0);
        let measured_alt = round_to(gauss(&mut rng, alt, rc.altitude_noise_m), 0.01);

        samples.push(SensorSample {
            timestamp: input.start_time + t as i64,
            power: Some(power),
            heart_rate: Some(measured_hr),
            cadence: Some(if coasting { 0.0 } else { round_to(80.0 + 15.0 * phi, 0.1) }),
            latitude: Some(round_to(lat, 1e-7)),
            longitude: Some(round_to(lon, 1e-7)),
            altitude: Some(measured_alt),
            speed: Some(round_to(speed, 0.001)),
        });

        let horizontal = speed * theta.cos();
        lat += horizontal * heading.cos() / METERS_PER_DEGREE;
        lon += horizontal * heading.sin() / (METERS_PER_DEGREE * lat.to_radians().cos());
        alt += vz;
        wind = rc.wind_ar * wind + gauss(&mut rng, 0.0, wind_innov);
    }

    let nominal_load = trimp_series(&nominal_hr, a, &TrimpParams::default());
    let stream = ActivityStream::new(a.subject_id.clone(), 8, samples).expect("simulated stream is valid");
    Ride { stream, nominal_load }
}
