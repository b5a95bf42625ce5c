//! Bio-variables and cohort-relative summary scores.

mod face;
mod panel;
mod scores;

pub use face::{fwhr, FacialLandmarks, Point};
pub use panel::{
    assemble_panels, panel_header, raw_bio_variables, read_landmarks, write_panels, BioVar, BioVarConfig,
    BioVariablePanel, RawBioVariables, SubjectInputs, LANDMARK_HEADER, SCORE_COLUMNS,
};
pub use scores::{
    anthropometrics, circadian_disruption, circulation_score, cohort_normalize, heart_score, high_friction_risk,
    inherent_ascvd, mean_present, metabolism_score, normalize_present, Anthropometrics, AscvdWeights, HeartWeights,
    Normalized, BMI_RANGE, MIN_ADULT_AGE, WHTR_RANGE,
};
