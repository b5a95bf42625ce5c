//! Cardiovascular health-state estimation from wearable activity streams.

pub mod biovars;
pub mod enviro;
pub mod error;
pub mod estimators;
pub mod features;
pub mod ingest;
pub mod io;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
