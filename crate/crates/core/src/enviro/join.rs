use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{EnviroError, Error, Result};

/// Variables carried by the environmental tables. Each table holds exactly
/// one, keyed by zip (crime and cardiac deaths may come pre-resolved from
/// county level, hence the `county_or_zip` key column).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvVariable {
    Income,
    Pm25,
    Light,
    Noise,
    Crime,
    CardiacDeath,
}

impl EnvVariable {
    pub const ALL: [EnvVariable; 6] = [
        EnvVariable::Income,
        EnvVariable::Pm25,
        EnvVariable::Light,
        EnvVariable::Noise,
        EnvVariable::Crime,
        EnvVariable::CardiacDeath,
    ];

    /// `[key column, value column]` of the table schema.
    pub fn header(self) -> [&'static str; 2] {
        match self {
            EnvVariable::Income => ["zip", "income_usd"],
            EnvVariable::Pm25 => ["zip", "pm25"],
            EnvVariable::Light => ["zip", "light_index"],
            EnvVariable::Noise => ["zip", "noise_db"],
            EnvVariable::Crime => ["county_or_zip", "crime_index"],
            EnvVariable::CardiacDeath => ["county_or_zip", "cardiac_death_per100k"],
        }
    }

    pub fn from_header(key: &str, value: &str) -> Option<EnvVariable> {
        Self::ALL.into_iter().find(|v| v.header() == [key, value])
    }
}

/// One environmental table, e.g. `zip,pm25`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvTable {
    /// Where the table came from; recorded as provenance on joined values.
    pub source: String,
    pub variable: EnvVariable,
    pub values: BTreeMap<String, f64>,
}

impl EnvTable {
    /// Parses a two-column table, recognizing the variable from the header.
    pub fn read_csv<R: Read>(source: &str, reader: R) -> std::result::Result<Self, EnviroError> {
        let table_err = |message: String| EnviroError::Table {
            path: source.to_string(),
            message,
        };
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers().map_err(|e| table_err(e.to_string()))?.clone();
        let variable = match (header.get(0), header.get(1), header.len()) {
            (Some(k), Some(v), 2) => EnvVariable::from_header(k.trim(), v.trim()),
            _ => None,
        }
        .ok_or_else(|| {
            table_err(format!(
                "unrecognized header `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ))
        })?;
        let mut values = BTreeMap::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| table_err(e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            let zip = rec[0].trim().to_string();
            let value: f64 = rec[1]
                .trim()
                .parse()
                .map_err(|_| table_err(format!("line {line}: bad value `{}`", &rec[1])))?;
            if !(value >= 0.0) || !value.is_finite() {
                return Err(table_err(format!("line {line}: value {value} must be finite and nonnegative")));
            }
            if values.insert(zip.clone(), value).is_some() {
                return Err(table_err(format!("line {line}: duplicate key {zip}")));
            }
        }
        Ok(EnvTable {
            source: source.to_string(),
            variable,
            values,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::read_csv(&path.display().to_string(), file)?)
    }
}

/// Environmental values for one zip. Absent values are `None`, never zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnvironmentRecord {
    pub zip: String,
    /// USD per year.
    pub income: Option<f64>,
    /// Per 100k.
    pub cardiac_death_rate: Option<f64>,
    pub crime_index: Option<f64>,
    /// µg/m³
    pub pm25: Option<f64>,
    /// Radiance index.
    pub light_pollution: Option<f64>,
    /// dB
    pub noise: Option<f64>,
    /// Source table of each populated value.
    pub provenance: BTreeMap<EnvVariable, String>,
}

impl EnvironmentRecord {
    pub fn get(&self, variable: EnvVariable) -> Option<f64> {
        match variable {
            EnvVariable::Income => self.income,
            EnvVariable::Pm25 => self.pm25,
            EnvVariable::Light => self.light_pollution,
            EnvVariable::Noise => self.noise,
            EnvVariable::Crime => self.crime_index,
            EnvVariable::CardiacDeath => self.cardiac_death_rate,
        }
    }

    fn slot(&mut self, variable: EnvVariable) -> &mut Option<f64> {
        match variable {
            EnvVariable::Income => &mut self.income,
            EnvVariable::Pm25 => &mut self.pm25,
            EnvVariable::Light => &mut self.light_pollution,
            EnvVariable::Noise => &mut self.noise,
            EnvVariable::Crime => &mut self.crime_index,
            EnvVariable::CardiacDeath => &mut self.cardiac_death_rate,
        }
    }
}

/// Assembles the record for `zip` from every table that lists it. When two
/// tables carry the same variable, the later-listed one wins.
pub fn join_environment(zip: &str, tables: &[EnvTable]) -> std::result::Result<EnvironmentRecord, EnviroError> {
    let mut record = EnvironmentRecord {
        zip: zip.to_string(),
        ..Default::default()
    };
    let mut found = false;
    for table in tables {
        let Some(&value) = table.values.get(zip) else { continue };
        found = true;
        if let Some(previous) = record.get(table.variable) {
            let earlier = &record.provenance[&table.variable];
            log::info!(
                "zip {zip}: {:?} {previous} from {earlier} replaced by {value} from {}",
                table.variable,
                table.source
            );
        }
        *record.slot(table.variable) = Some(value);
        record.provenance.insert(table.variable, table.source.clone());
    }
    if !found {
        return Err(EnviroError::ZipNotFound(zip.to_string()));
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(source: &str, text: &str) -> EnvTable {
        EnvTable::read_csv(source, text.as_bytes()).unwrap()
    }

    fn all_tables() -> Vec<EnvTable> {
        vec![
            table("income.csv", "zip,income_usd\n94301,120000\n95014,95000\n"),
            table("pm25.csv", "zip,pm25\n94301,8.5\n95014,7.0\n"),
            table("light.csv", "zip,light_index\n94301,30\n95014,20\n"),
            table("noise.csv", "zip,noise_db\n94301,55\n"),
            table("crime.csv", "county_or_zip,crime_index\n94301,150\n95014,90\n"),
            table("deaths.csv", "county_or_zip,cardiac_death_per100k\n94301,140\n95014,150\n"),
        ]
    }

    #[test]
    fn full_record() {
        let r = join_environment("94301", &all_tables()).unwrap();
        assert_eq!(r.income, Some(120000.0));
        assert_eq!(r.noise, Some(55.0));
        assert_eq!(r.cardiac_death_rate, Some(140.0));
        assert_eq!(r.provenance.len(), 6);
        assert_eq!(r.provenance[&EnvVariable::Pm25], "pm25.csv");
    }

    #[test]
    fn missing_noise_is_absent() {
        let r = join_environment("95014", &all_tables()).unwrap();
        assert_eq!(r.noise, None);
        assert!(!r.provenance.contains_key(&EnvVariable::Noise));
        assert_eq!(r.crime_index, Some(90.0));
    }

    #[test]
    fn later_table_wins() {
        let mut tables = all_tables();
        tables.push(table("county_income.csv", "zip,income_usd\n94301,110000\n"));
        let r = join_environment("94301", &tables).unwrap();
        assert_eq!(r.income, Some(110000.0));
        assert_eq!(r.provenance[&EnvVariable::Income], "county_income.csv");
    }

    #[test]
    fn unknown_zip() {
        assert!(matches!(
            join_environment("00000", &all_tables()),
            Err(EnviroError::ZipNotFound(_))
        ));
    }

    #[test]
    fn bad_tables() {
        assert!(EnvTable::read_csv("x", "zip,whatever\n1,2\n".as_bytes()).is_err());
        assert!(EnvTable::read_csv("x", "zip,pm25\n1,-2\n".as_bytes()).is_err());
        assert!(EnvTable::read_csv("x", "zip,pm25\n1,2\n1,3\n".as_bytes()).is_err());
    }
}
