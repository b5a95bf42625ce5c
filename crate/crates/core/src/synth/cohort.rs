use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, NaiveTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SynthConfig;
use super::dynamics::FitnessModel;
use super::ride::{gauss, plan_route, simulate_activity, Ride, RideInput};
use super::world::{landmarks_row, World};
use crate::biovars::LANDMARK_HEADER;
use crate::error::{Error, Result};
use crate::features::{activity_features, FeatureOptions, SubjectFeatures};
use crate::ingest::{degrade_to_device, write_activity, AthleteProfile, DeviceProfile, Sex, TimezoneChange};
use crate::io::{sha256_hex, write_atomic, write_string};

/// Latent per-subject parameters the generator draws; the estimators never
/// see them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectTraits {
    pub baseline: f64,
    pub gain: f64,
    /// Mean daily load at mid-period.
    pub load_level: f64,
    /// Daily load change per day.
    pub trend: f64,
    pub endurance_fraction: f64,
    pub hr_response: f64,
    pub hr_drift_pct_per_h: f64,
    /// Non-gravity loss at 0% grade, W/kg.
    pub resistance: f64,
    pub start_hour: f64,
    pub start_sd_min: f64,
    pub device_id: u8,
    pub home_zip: String,
    pub home: (f64, f64),
}

/// Simulator truth for one day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub date: NaiveDate,
    /// Latent VO2max at the start of the day.
    pub vo2max: f64,
    /// Trailing 42-day mean of the latent value over riding days: the
    /// quantity the power-based reference measures.
    pub reference_vo2max: Option<f64>,
    /// Nominal training load of the day.
    pub load: f64,
    pub rode: bool,
}

pub const TRUTH_HEADER: &str = "date,vo2max,reference_vo2max,load,rode";

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectSim {
    pub athlete: AthleteProfile,
    pub traits: SubjectTraits,
    pub truth: Vec<TruthRow>,
}

pub fn subject_id(index: usize) -> String {
    format!("s{:02}", index + 1)
}

fn subject_rng(cfg: &SynthConfig, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64 + 1);
    rng
}

const ETHNICITIES: [&str; 5] = ["white", "black", "hispanic", "asian", "other"];

/// Draws profile and traits. The number of draws does not depend on the
/// configuration values, so presets sharing a seed share their cohort.
fn draw_subject(cfg: &SynthConfig, world: &World, index: usize, rng: &mut ChaCha8Rng) -> (AthleteProfile, SubjectTraits) {
    let f = &cfg.fitness;
    let s = &cfg.schedule;
    let e = &cfg.effort;
    let h = &cfg.heart;
    let r = &cfg.route;

    let birth_year = rng.random_range(1960..=2000);
    let age = f64::from(cfg.start_date.year() - birth_year);
    let body_mass = gauss(rng, 72.0, 7.0).clamp(52.0, 105.0).round();
    let resting_hr = gauss(rng, 52.0, 5.0).clamp(38.0, 70.0).round();
    let max_hr = (208.0 - 0.7 * age + gauss(rng, 0.0, 5.0)).round().max(resting_hr + 70.0);
    let smoker = rng.random_bool(0.1);
    let ethnicity = ETHNICITIES[rng.random_range(0..ETHNICITIES.len())].to_string();
    let height = gauss(rng, 178.0, 7.0).clamp(155.0, 205.0).round();
    let waist = gauss(rng, 84.0, 8.0).clamp(65.0, 120.0).round();
    let education_level = rng.random_range(1..=7);
    let occupation_level = rng.random_range(1..=9);
    let home_offset = -f64::from(rng.random_range(5..=8));

    let mut timezone_history = vec![TimezoneChange {
        date: cfg.start_date,
        utc_offset_hours: home_offset,
    }];
    let mut day = 1;
    while day < cfg.days {
        let travel = rng.random_bool(s.travel_prob);
        let shift = f64::from(rng.random_range(1..=3)) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let length = rng.random_range(3..=10);
        if travel && day + length < cfg.days {
            let away = cfg.start_date + Duration::days(i64::from(day));
            timezone_history.push(TimezoneChange {
                date: away,
                utc_offset_hours: home_offset + shift,
            });
            timezone_history.push(TimezoneChange {
                date: away + Duration::days(i64::from(length)),
                utc_offset_hours: home_offset,
            });
            day += length;
        }
        day += 1;
    }

    let baseline = gauss(rng, f.baseline_mean, f.baseline_sd);
    let gain = (f.gain_mean * (1.0 + gauss(rng, 0.0, f.gain_sd_frac))).max(0.1 * f.gain_mean);
    let load_level = gauss(rng, s.load_mean, s.load_sd).max(30.0);
    let trend = gauss(rng, s.trend_mean, s.trend_sd);
    let endurance_fraction = gauss(rng, e.endurance_fraction_mean, e.endurance_fraction_sd).clamp(0.35, 0.85);
    let hr_response = 1.0 + h.response_spread * rng.random_range(-1.0..=1.0);
    let hr_drift_pct_per_h = h.drift_max_pct_per_h * rng.random::<f64>();
    let resistance = gauss(rng, r.resistance_mean, r.resistance_sd).max(0.0);
    let start_hour = rng.random_range(s.start_hour_min..=s.start_hour_max);
    let start_sd_min = s.start_sd_max_min * rng.random::<f64>();
    let home_idx = rng.random_range(0..world.zips.len());
    let (home_zip, lat, lon) = world.zips[home_idx].clone();
    let device_id = if cfg.devices.is_empty() {
        8
    } else {
        cfg.devices[index % cfg.devices.len()]
    };

    let athlete = AthleteProfile {
        subject_id: subject_id(index),
        body_mass,
        resting_hr,
        max_hr,
        birth_year,
        sex: Sex::Male,
        smoker,
        ethnicity,
        height,
        waist,
        education_level,
        occupation_level,
        timezone_history,
    };
    let traits = SubjectTraits {
        baseline,
        gain,
        load_level,
        trend,
        endurance_fraction,
        hr_response,
        hr_drift_pct_per_h,
        resistance,
        start_hour,
        start_sd_min,
        device_id,
        home_zip,
        home: (lat, lon),
    };
    (athlete, traits)
}

/// Runs one subject day by day, handing every ride and its local date to
/// `on_ride`.
pub fn simulate_subject(
    cfg: &SynthConfig,
    world: &World,
    index: usize,
    mut on_ride: impl FnMut(NaiveDate, &Ride) -> Result<()>,
) -> Result<SubjectSim> {
    let mut rng = subject_rng(cfg, index);
    let (athlete, traits) = draw_subject(cfg, world, index, &mut rng);
    let s = &cfg.schedule;
    let model = FitnessModel {
        baseline: traits.baseline,
        gain: traits.gain,
        tau_days: cfg.fitness.tau_days,
        min_vo2max: cfg.fitness.min_vo2max,
        max_vo2max: cfg.fitness.max_vo2max,
    };
    let mid = f64::from(cfg.days) / 2.0;
    let ride_share = 1.0 - s.rest_day_prob;
    let mut vo2max = if cfg.start_on_trend {
        model.on_ramp(ride_share * (traits.load_level - traits.trend * mid), ride_share * traits.trend)
    } else {
        model.baseline
    };

    let mut truth = Vec::with_capacity(cfg.days as usize);
    for d in 0..cfg.days {
        let date = cfg.start_date + Duration::days(i64::from(d));
        let ramp = (traits.load_level + traits.trend * (f64::from(d) - mid)).max(20.0);
        let target = (ramp * (1.0 + gauss(&mut rng, 0.0, s.day_load_sd_frac))).max(15.0);
        let rest = rng.random_bool(s.rest_day_prob);
        let start_jitter_h = gauss(&mut rng, 0.0, traits.start_sd_min) / 60.0;
        let away = rng.random_bool(0.15);
        let other_zip = rng.random_range(0..world.zips.len());
        let jitter = (gauss(&mut rng, 0.0, 0.003), gauss(&mut rng, 0.0, 0.003));
        let origin_alt = rng.random_range(20.0..300.0);
        let route_seed: u64 = rng.random();
        let ride_seed: u64 = rng.random();
        let shock = gauss(&mut rng, 0.0, cfg.fitness.process_sd);

        let mut load = 0.0;
        if !rest {
            let local_hour = (traits.start_hour + start_jitter_h).clamp(4.0, 21.0);
            let local = date.and_time(NaiveTime::MIN) + Duration::seconds((local_hour * 3600.0).round() as i64);
            let offset = athlete.utc_offset_on(date);
            let start_time = (local - Duration::seconds((offset * 3600.0).round() as i64)).and_utc().timestamp();
            let (lat, lon) = if away {
                (world.zips[other_zip].1, world.zips[other_zip].2)
            } else {
                traits.home
            };
            let input = RideInput {
                athlete: &athlete,
                traits: &traits,
                vo2max,
                start_time,
                origin: (lat + jitter.0, lon + jitter.1, origin_alt),
                target_load: target,
            };
            let route = plan_route(&input, cfg, &mut ChaCha8Rng::seed_from_u64(route_seed));
            let ride = simulate_activity(&input, &route, cfg, ride_seed);
            load = ride.nominal_load;
            on_ride(date, &ride)?;
        }
        truth.push(TruthRow {
            date,
            vo2max,
            reference_vo2max: None,
            load,
            rode: !rest,
        });
        vo2max = (model.update_fitness(vo2max, load) + shock).clamp(model.min_vo2max, model.max_vo2max);
    }

    let span = 42;
    for i in 0..truth.len() {
        let lo = i.saturating_sub(span - 1);
        let rides: Vec<f64> = truth[lo..=i].iter().filter(|t| t.rode).map(|t| t.vo2max).collect();
        truth[i].reference_vo2max = (!rides.is_empty()).then(|| rides.iter().sum::<f64>() / rides.len() as f64);
    }
    Ok(SubjectSim { athlete, traits, truth })
}

/// A simulated subject with features extracted from its device-8 rides.
#[derive(Debug, Clone)]
pub struct SimulatedSubject {
    pub sim: SubjectSim,
    pub features: SubjectFeatures,
}

/// Simulates the cohort in memory, keeping only per-activity features.
pub fn simulate_features(cfg: &SynthConfig, opts: &FeatureOptions) -> Result<Vec<SimulatedSubject>> {
    cfg.validate()?;
    let world = World::generate(cfg.seed);
    (0..cfg.n_subjects)
        .into_par_iter()
        .map(|i| {
            let mut acts = Vec::new();
            let mut athlete: Option<AthleteProfile> = None;
            let sim = simulate_subject(cfg, &world, i, |_, ride| {
                let a = athlete.get_or_insert_with(|| {
                    let mut rng = subject_rng(cfg, i);
                    draw_subject(cfg, &world, i, &mut rng).0
                });
                acts.push(activity_features(&ride.stream, a, opts));
                Ok(())
            })?;
            let features = SubjectFeatures::from_activities(sim.athlete.subject_id.clone(), acts);
            Ok(SimulatedSubject { sim, features })
        })
        .collect()
}

/// One file listed in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub seed: u64,
    pub n_subjects: usize,
    pub days: u32,
    pub n_activities: usize,
    pub subjects: Vec<String>,
    pub files: Vec<ManifestEntry>,
}

fn entry(path: String, bytes: &[u8]) -> ManifestEntry {
    ManifestEntry {
        path,
        sha256: sha256_hex(bytes),
        bytes: bytes.len() as u64,
    }
}

fn write_bytes(root: &Path, rel: &str, bytes: &[u8]) -> Result<ManifestEntry> {
    write_atomic(&root.join(rel), |w| std::io::Write::write_all(w, bytes))?;
    Ok(entry(rel.to_string(), bytes))
}

fn truth_csv(truth: &[TruthRow]) -> String {
    let mut s = format!("{TRUTH_HEADER}\n");
    for t in truth {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            t.date,
            t.vo2max,
            t.reference_vo2max.map(|v| v.to_string()).unwrap_or_default(),
            t.load,
            t.rode
        ));
    }
    s
}

/// Writes the cohort under `out_dir`:
///
/// ```text
/// cohort/<subject>/activities/<date>_dev8.csv   full stream
/// cohort/<subject>/activities/<date>_dev<k>.csv copy degraded to device k
/// cohort/<subject>/truth.csv, profile.toml, traits.json
/// landmarks.csv, geo/zips.csv, env/*.csv, synth.toml
/// manifest.json                                 every file with its SHA-256
/// ```
pub fn gen_cohort(cfg: &SynthConfig, out_dir: &Path) -> Result<Manifest> {
    cfg.validate()?;
    let world = World::generate(cfg.seed);
    let per_subject: Vec<(Vec<ManifestEntry>, usize)> = (0..cfg.n_subjects)
        .into_par_iter()
        .map(|i| {
            let sid = subject_id(i);
            let dir = format!("cohort/{sid}");
            let mut files = Vec::new();
            let mut n = 0;
            let device = {
                let mut rng = subject_rng(cfg, i);
                draw_subject(cfg, &world, i, &mut rng).1.device_id
            };
            let degraded = (device != 8).then(|| DeviceProfile::builtin(device)).transpose()?;
            let sim = simulate_subject(cfg, &world, i, |date, ride| {
                let mut buf = Vec::new();
                write_activity(&ride.stream, &mut buf).map_err(|e| Error::io(&dir, e))?;
                files.push(write_bytes(out_dir, &format!("{dir}/activities/{date}_dev8.csv"), &buf)?);
                if let Some(profile) = &degraded {
                    let copy = degrade_to_device(&ride.stream, profile)?;
                    let mut buf = Vec::new();
                    write_activity(&copy, &mut buf).map_err(|e| Error::io(&dir, e))?;
                    files.push(write_bytes(out_dir, &format!("{dir}/activities/{date}_dev{device}.csv"), &buf)?);
                }
                n += 1;
                Ok(())
            })?;
            files.push(write_bytes(out_dir, &format!("{dir}/truth.csv"), truth_csv(&sim.truth).as_bytes())?);
            files.push(write_bytes(
                out_dir,
                &format!("{dir}/profile.toml"),
                sim.athlete.to_toml_string()?.as_bytes(),
            )?);
            let traits = serde_json::to_string_pretty(&sim.traits).expect("traits serialize") + "\n";
            files.push(write_bytes(out_dir, &format!("{dir}/traits.json"), traits.as_bytes())?);
            Ok((files, n))
        })
        .collect::<Result<_>>()?;

    let mut files: Vec<ManifestEntry> = Vec::new();
    let mut n_activities = 0;
    for (f, n) in per_subject {
        files.extend(f);
        n_activities += n;
    }
    for (rel, text) in world.tables() {
        files.push(write_bytes(out_dir, &rel, text.as_bytes())?);
    }
    let mut landmarks = Vec::new();
    {
        use std::io::Write;
        writeln!(landmarks, "{}", LANDMARK_HEADER.join(",")).expect("in-memory write");
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(u64::MAX);
        for i in 0..cfg.n_subjects {
            landmarks_row(&subject_id(i), &mut rng, &mut landmarks).expect("in-memory write");
        }
    }
    files.push(write_bytes(out_dir, "landmarks.csv", &landmarks)?);
    let config_text = toml::to_string(cfg).map_err(|e| Error::Config(e.to_string()))?;
    files.push(write_bytes(out_dir, "synth.toml", config_text.as_bytes())?);
    files.sort_by(|a, b| a.path.cmp(&b.path));

    let manifest = Manifest {
        format_version: 1,
        seed: cfg.seed,
        n_subjects: cfg.n_subjects,
        days: cfg.days,
        n_activities,
        subjects: (0..cfg.n_subjects).map(subject_id).collect(),
        files,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write_string(&out_dir.join("manifest.json"), &text)?;
    Ok(manifest)
}
