//! Synthetic geography and environment tables shared by a cohort.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ride::gauss;

/// Zip-code centroids on a grid around a fixed region, plus per-zip
/// environmental values. Some zips are left out of the noise table so joins
/// exercise missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub zips: Vec<(String, f64, f64)>,
    pub income: Vec<f64>,
    pub pm25: Vec<f64>,
    pub light: Vec<f64>,
    pub noise: Vec<Option<f64>>,
    pub crime: Vec<f64>,
    pub cardiac_death: Vec<f64>,
}

const GRID: usize = 6;

impl World {
    pub fn generate(seed: u64) -> World {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        let mut w = World {
            zips: Vec::new(),
            income: Vec::new(),
            pm25: Vec::new(),
            light: Vec::new(),
            noise: Vec::new(),
            crime: Vec::new(),
            cardiac_death: Vec::new(),
        };
        for i in 0..GRID * GRID {
            let lat = 37.2 + 0.08 * (i / GRID) as f64 + rng.random_range(-0.01..0.01);
            let lon = -122.3 + 0.08 * (i % GRID) as f64 + rng.random_range(-0.01..0.01);
            w.zips.push((format!("95{:03}", 10 + 7 * i), round(lat, 1e-5), round(lon, 1e-5)));
            w.income.push(round(rng.random_range(45_000.0..180_000.0), 1.0));
            w.pm25.push(round(rng.random_range(4.0..16.0), 0.1));
            w.light.push(round(rng.random_range(2.0..60.0), 0.1));
            let noise = round(rng.random_range(42.0..72.0), 0.1);
            w.noise.push((!rng.random_bool(0.1)).then_some(noise));
            w.crime.push(round(rng.random_range(40.0..320.0), 1.0));
            w.cardiac_death.push(round(gauss(&mut rng, 160.0, 30.0).max(60.0), 0.1));
        }
        w
    }

    /// `(path relative to the output root, contents)` for every table.
    pub fn tables(&self) -> Vec<(String, String)> {
        let table = |header: &str, values: &dyn Fn(usize) -> Option<f64>| {
            let mut s = format!("{header}\n");
            for (i, (zip, _, _)) in self.zips.iter().enumerate() {
                if let Some(v) = values(i) {
                    s.push_str(&format!("{zip},{v}\n"));
                }
            }
            s
        };
        let mut zips = String::from("zip,lat,lon\n");
        for (zip, lat, lon) in &self.zips {
            zips.push_str(&format!("{zip},{lat},{lon}\n"));
        }
        vec![
            ("geo/zips.csv".into(), zips),
            ("env/income.csv".into(), table("zip,income_usd", &|i| Some(self.income[i]))),
            ("env/pm25.csv".into(), table("zip,pm25", &|i| Some(self.pm25[i]))),
            ("env/light.csv".into(), table("zip,light_index", &|i| Some(self.light[i]))),
            ("env/noise.csv".into(), table("zip,noise_db", &|i| self.noise[i])),
            ("env/crime.csv".into(), table("county_or_zip,crime_index", &|i| Some(self.crime[i]))),
            (
                "env/cardiac_death.csv".into(),
                table("county_or_zip,cardiac_death_per100k", &|i| Some(self.cardiac_death[i])),
            ),
        ]
    }
}

fn round(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}

/// Facial landmark CSV header; image coordinates with y growing downward.
/// Plausible landmark coordinates for one subject.
pub fn landmarks_row<R: Rng, W: Write>(subject_id: &str, rng: &mut R, out: &mut W) -> std::io::Result<()> {
    let cx = rng.random_range(300.0..340.0_f64).round();
    let cy = rng.random_range(380.0..420.0_f64).round();
    let width = rng.random_range(125.0..155.0_f64).round();
    let height = rng.random_range(62.0..80.0_f64).round();
    writeln!(
        out,
        "{subject_id},{},{},{},{},{},{},{},{}",
        cx - width / 2.0,
        cy,
        cx + width / 2.0,
        cy,
        cx,
        cy + height / 2.0,
        cx,
        cy - height / 2.0
    )
}
