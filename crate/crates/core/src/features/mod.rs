//! Per-activity and per-day feature extraction, and trailing load windows.

pub mod cardiac;
mod daily;
pub(crate) mod load;
mod rolling;
mod table;
mod windows;

pub use cardiac::{hr_drift, hr_recovery, stroke_volume_proxy, CardiacOptions};
pub use daily::{activity_features, local_start, ActivityFeatures, DailyFeatures, DatedWindow, FeatureOptions, SubjectFeatures};
pub use load::{active_time, hr_reserve_fraction, mechanical_work, trimp, trimp_series, TrimpParams, ACTIVE_SPEED_MPS};
pub use rolling::{rolling_aggregate, LoadWindow};
pub use table::{read_daily, read_windows, write_daily, write_load_windows, write_windows};
pub use windows::{best_window_relative_power, gravity_relative_power, window_features, WindowFeature, WindowOptions, GRAVITY};

pub(crate) use table::check_header;
pub(crate) use windows::haversine_m;
