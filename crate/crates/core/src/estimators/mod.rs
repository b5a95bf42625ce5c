//! CRF estimators: load-based linear models, the slope-thresholded VAM model
//! bank, inverse-error fusion, and the global/personal protocols.

mod bank;
mod conversion;
mod estimate;
mod eval;
mod ols;
mod protocol;
mod split;
mod table;

pub use bank::{
    fit_vam_bank, select_vam_model, table1_report, write_table1, Table1Row, VamModelBank, MAX_THRESHOLD,
    MIN_BANK_WINDOWS, TABLE1_HEADER,
};
pub use conversion::{ground_truth_crf, power_to_vo2max, rolling_mean, Conversion, TRUTH_SPAN_DAYS};
pub use estimate::{combine_estimates, estimate_from_load, load_feature, CrfEstimate, Source, VO2MAX_RANGE};
pub use eval::{align, error_stats, evaluate, evaluate_cohort, mean_ci95, ErrorStats, EvalReport};
pub use ols::{fit_ols, LinearModel};
pub use protocol::{
    estimate, global_crossfit, memory_sweep, run_protocol, table1, train, EstimatorSet, Estimates, ModelFile,
    PredictionRow, ProtocolConfig, SweepRow, TrainedModel, DEFAULT_SPAN_DAYS, GLOBAL_KEY, MODEL_FORMAT_VERSION,
};
pub use split::{personal_cut, split_subjects, Mode, SubjectSplit, PERSONAL_MIN_POINTS, PERSONAL_TRAIN_FRACTION};
pub use table::{write_estimates, write_eval, write_sweep};
