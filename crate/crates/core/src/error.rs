use std::path::PathBuf;

use crate::ingest::Channel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Top-level error. Every variant is prefixed with the module it came from so
/// the CLI can print module-qualified messages.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("ingest: {0}")]
    Ingest(#[from] IngestError),
    #[error("features: {0}")]
    Features(#[from] FeatureError),
    #[error("estimators: {0}")]
    Estimators(#[from] EstimatorError),
    #[error("biovars: {0}")]
    BioVars(#[from] BioVarError),
    #[error("enviro: {0}")]
    Enviro(#[from] EnviroError),
    #[error("report: {0}")]
    Report(#[from] ReportError),
    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("row {row}: timestamp {timestamp} does not increase (previous {previous})")]
    NonMonotonic {
        row: usize,
        timestamp: i64,
        previous: i64,
    },
    #[error("row {row}: {channel} value {value} outside [{min}, {max}]")]
    OutOfRange {
        row: usize,
        channel: Channel,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("stream is empty")]
    Empty,
    #[error("longest segment is {seconds} s, shorter than the {minimum} s minimum")]
    TooShort { seconds: i64, minimum: i64 },
    #[error("device {device} requires channel {channel}, absent from input")]
    MissingChannel { device: u8, channel: Channel },
    #[error("unknown device id {0}")]
    UnknownDevice(u8),
}

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("heart rate present on {coverage:.1}% of samples, need at least {required:.0}%")]
    InsufficientHeartRate { coverage: f64, required: f64 },
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, thiserror::Error)]
pub enum EstimatorError {
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),
    #[error("partition: {0}")]
    Partition(String),
    #[error("evaluation: predictions and truth share no dates")]
    EmptyOverlap,
    #[error("model bank: {0}")]
    Bank(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported model file version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
}

#[derive(Debug, thiserror::Error)]
pub enum BioVarError {
    #[error("degenerate landmark geometry: {0}")]
    DegenerateGeometry(String),
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, thiserror::Error)]
pub enum EnviroError {
    #[error("lookup table is empty")]
    EmptyTable,
    #[error("zip {0} not found in any environment table")]
    ZipNotFound(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{path}: {message}")]
    Table { path: String, message: String },
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("schema: {0}")]
    Schema(String),
}
