//! Home-location inference, environmental joins and socioeconomic status.

mod geo;
mod join;

pub use geo::{infer_home_zip, GeoLookupTable, GEO_HEADER};
pub use join::{join_environment, EnvTable, EnvVariable, EnvironmentRecord};

use crate::error::EnviroError;

pub const EDUCATION_LEVELS: u8 = 7;
pub const OCCUPATION_LEVELS: u8 = 9;
const OCCUPATION_WEIGHT: f64 = 5.0;
const EDUCATION_WEIGHT: f64 = 3.0;

/// Socioeconomic status in [0, 1]: a two-factor index (occupation weighted 5,
/// education 3) rescaled to [0, 1], averaged with the normalized zip income.
pub fn ses_score(education_level: u8, occupation_level: u8, zip_income_norm: f64) -> Result<f64, EnviroError> {
    if !(1..=EDUCATION_LEVELS).contains(&education_level) {
        return Err(EnviroError::Domain(format!(
            "education level {education_level} outside 1..={EDUCATION_LEVELS}"
        )));
    }
    if !(1..=OCCUPATION_LEVELS).contains(&occupation_level) {
        return Err(EnviroError::Domain(format!(
            "occupation level {occupation_level} outside 1..={OCCUPATION_LEVELS}"
        )));
    }
    if !(0.0..=1.0).contains(&zip_income_norm) {
        return Err(EnviroError::Domain(format!("income norm {zip_income_norm} outside [0, 1]")));
    }
    let lo = OCCUPATION_WEIGHT + EDUCATION_WEIGHT;
    let hi = OCCUPATION_WEIGHT * f64::from(OCCUPATION_LEVELS) + EDUCATION_WEIGHT * f64::from(EDUCATION_LEVELS);
    let index = OCCUPATION_WEIGHT * f64::from(occupation_level) + EDUCATION_WEIGHT * f64::from(education_level);
    Ok(((index - lo) / (hi - lo) + zip_income_norm) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ses_extremes() {
        assert_eq!(ses_score(7, 9, 1.0).unwrap(), 1.0);
        assert_eq!(ses_score(1, 1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn ses_mid_scale() {
        // (5*5 + 3*3 - 8) / 58 = 26/58, averaged with 0.5.
        let expected = (26.0 / 58.0 + 0.5) / 2.0;
        assert!((ses_score(3, 5, 0.5).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.474138).abs() < 1e-6);
    }

    #[test]
    fn ses_rejects_out_of_scale() {
        assert!(ses_score(0, 5, 0.5).is_err());
        assert!(ses_score(8, 5, 0.5).is_err());
        assert!(ses_score(3, 10, 0.5).is_err());
        assert!(ses_score(3, 5, 1.5).is_err());
    }
}
