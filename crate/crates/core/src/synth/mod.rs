//! Synthetic athletes with known fitness trajectories and physically
//! consistent sensor streams.

mod cohort;
mod config;
mod dynamics;
mod ride;
mod world;

pub use cohort::{
    gen_cohort, simulate_features, simulate_subject, subject_id, Manifest, ManifestEntry, SimulatedSubject, SubjectSim,
    SubjectTraits, TruthRow, TRUTH_HEADER,
};
pub use config::{EffortConfig, FitnessConfig, HeartConfig, RouteConfig, ScheduleConfig, SynthConfig};
pub use dynamics::FitnessModel;
pub use ride::{max_power_w, plan_route, simulate_activity, Ride, RideInput, Route, RouteSegment};
pub use world::World;
