use std::collections::BTreeMap;
use std::io::Read;

use crate::error::EnviroError;
use crate::features::haversine_m;

pub const GEO_HEADER: [&str; 3] = ["zip", "lat", "lon"];

/// Zip-code centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoLookupTable {
    entries: Vec<(String, f64, f64)>,
}

impl GeoLookupTable {
    pub fn new(entries: Vec<(String, f64, f64)>) -> Result<Self, EnviroError> {
        let mut seen = std::collections::BTreeSet::new();
        for (zip, lat, lon) in &entries {
            if !seen.insert(zip.as_str()) {
                return Err(EnviroError::Domain(format!("duplicate zip {zip} in lookup table")));
            }
            if !(-90.0..=90.0).contains(lat) || !(-180.0..=180.0).contains(lon) {
                return Err(EnviroError::Domain(format!("zip {zip}: invalid centroid ({lat}, {lon})")));
            }
        }
        Ok(GeoLookupTable { entries })
    }

    pub fn read_csv<R: Read>(source: &str, reader: R) -> Result<Self, EnviroError> {
        let table_err = |message: String| EnviroError::Table {
            path: source.to_string(),
            message,
        };
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers().map_err(|e| table_err(e.to_string()))?;
        if header.iter().ne(GEO_HEADER) {
            return Err(table_err(format!("expected header `{}`", GEO_HEADER.join(","))));
        }
        let mut entries = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| table_err(e.to_string()))?;
            let num = |i: usize| {
                rec[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| table_err(format!("bad {} `{}`", GEO_HEADER[i], &rec[i])))
            };
            entries.push((rec[0].trim().to_string(), num(1)?, num(2)?));
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(String, f64, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Zip whose centroid is closest by great-circle distance; the first
    /// listed wins exact ties.
    pub fn nearest(&self, lat: f64, lon: f64) -> Option<&str> {
        self.entries
            .iter()
            .map(|(zip, zlat, zlon)| (zip, haversine_m(lat, lon, *zlat, *zlon)))
            .fold(None, |best: Option<(&String, f64)>, (zip, d)| match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some((zip, d)),
            })
            .map(|(zip, _)| zip.as_str())
    }
}

/// Most frequent nearest zip over activity starts given in chronological
/// order. Ties go to the zip of the most recent start among the tied.
pub fn infer_home_zip(activity_starts: &[(f64, f64)], table: &GeoLookupTable) -> Result<String, EnviroError> {
    if table.is_empty() {
        return Err(EnviroError::EmptyTable);
    }
    if activity_starts.is_empty() {
        return Err(EnviroError::Domain("no activity start coordinates".into()));
    }
    // zip -> (count, index of latest start)
    let mut tally: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (i, &(lat, lon)) in activity_starts.iter().enumerate() {
        let zip = table.nearest(lat, lon).expect("table is not empty");
        let entry = tally.entry(zip).or_insert((0, i));
        entry.0 += 1;
        entry.1 = i;
    }
    let (zip, _) = tally
        .into_iter()
        .max_by_key(|&(_, (count, latest))| (count, latest))
        .expect("at least one start");
    Ok(zip.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> GeoLookupTable {
        GeoLookupTable::new(vec![
            ("94301".into(), 37.44, -122.14),
            ("95014".into(), 37.32, -122.03),
            ("94110".into(), 37.75, -122.42),
        ])
        .unwrap()
    }

    const A: (f64, f64) = (37.441, -122.139);
    const B: (f64, f64) = (37.321, -122.031);

    #[test]
    fn unanimous_and_majority() {
        let t = table();
        assert_eq!(infer_home_zip(&[A; 10], &t).unwrap(), "94301");
        let mut starts = vec![A; 6];
        starts.extend([B; 4]);
        assert_eq!(infer_home_zip(&starts, &t).unwrap(), "94301");
    }

    #[test]
    fn tie_goes_to_latest() {
        let t = table();
        let mut starts = vec![A; 5];
        starts.extend([B; 4]);
        starts.insert(0, B);
        // Five each; the last start is near B.
        assert_eq!(infer_home_zip(&starts, &t).unwrap(), "95014");
        starts.push(A);
        starts.push(B);
        assert_eq!(infer_home_zip(&starts, &t).unwrap(), "95014");
    }

    #[test]
    fn errors() {
        let empty = GeoLookupTable::new(vec![]).unwrap();
        assert!(matches!(infer_home_zip(&[A], &empty), Err(EnviroError::EmptyTable)));
        assert!(infer_home_zip(&[], &table()).is_err());
        assert!(GeoLookupTable::new(vec![("1".into(), 0.0, 0.0), ("1".into(), 1.0, 1.0)]).is_err());
        assert!(GeoLookupTable::new(vec![("1".into(), 91.0, 0.0)]).is_err());
    }

    #[test]
    fn csv_round() {
        let t = GeoLookupTable::read_csv("zips.csv", "zip,lat,lon\n94301,37.44,-122.14\n".as_bytes()).unwrap();
        assert_eq!(t.nearest(37.0, -122.0), Some("94301"));
        assert!(GeoLookupTable::read_csv("x", "zip,lon,lat\n".as_bytes()).is_err());
    }
}
