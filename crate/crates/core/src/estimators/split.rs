use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::EstimatorError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Global,
    Personal,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Global => "global",
            Mode::Personal => "personal",
        }
    }
}

/// Subject-level partition for the global protocol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectSplit {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Seeded shuffle of subject ids; the first half (rounded down) trains.
/// Both halves are returned sorted.
pub fn split_subjects(subjects: &[String], seed: u64) -> Result<SubjectSplit, EstimatorError> {
    if subjects.len() < 2 {
        return Err(EstimatorError::Partition(format!(
            "global split needs at least 2 subjects, got {}",
            subjects.len()
        )));
    }
    let mut ids = subjects.to_vec();
    ids.sort();
    ids.dedup();
    if ids.len() != subjects.len() {
        return Err(EstimatorError::Partition("duplicate subject ids".into()));
    }
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = ids.split_off(ids.len() / 2);
    let mut split = SubjectSplit { train: ids, test };
    split.train.sort();
    split.test.sort();
    Ok(split)
}

pub const PERSONAL_TRAIN_FRACTION: f64 = 0.7;
pub const PERSONAL_MIN_POINTS: usize = 10;

/// Number of leading (chronological) points that train a personal model.
pub fn personal_cut(n_points: usize) -> Result<usize, EstimatorError> {
    if n_points < PERSONAL_MIN_POINTS {
        return Err(EstimatorError::Partition(format!(
            "personal split needs at least {PERSONAL_MIN_POINTS} dated points, got {n_points}"
        )));
    }
    Ok((PERSONAL_TRAIN_FRACTION * n_points as f64).floor() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i:02}")).collect()
    }

    #[test]
    fn half_of_24() {
        let s = split_subjects(&ids(24), 7).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (12, 12));
        assert!(s.train.iter().all(|x| !s.test.contains(x)));
        assert_eq!(s, split_subjects(&ids(24), 7).unwrap());
        assert_ne!(s, split_subjects(&ids(24), 8).unwrap());
        assert_eq!(split_subjects(&ids(5), 1).unwrap().train.len(), 2);
    }

    #[test]
    fn partition_errors() {
        assert!(split_subjects(&ids(1), 0).is_err());
        assert!(personal_cut(9).is_err());
        assert_eq!(personal_cut(100).unwrap(), 70);
        assert_eq!(personal_cut(10).unwrap(), 7);
    }
}
