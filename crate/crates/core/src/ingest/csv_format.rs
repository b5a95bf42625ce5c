use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{validate_samples, ActivityStream, Channel, SensorSample};
use crate::error::{Error, IngestError, Result};

/// Column order of the canonical activity file. An empty cell means the
/// channel is absent on that row.
pub const CANONICAL_HEADER: [&str; 8] = [
    "t",
    "power_w",
    "hr_bpm",
    "cadence_rpm",
    "lat_deg",
    "lon_deg",
    "alt_m",
    "speed_mps",
];

const COLUMN_CHANNELS: [Channel; 7] = [
    Channel::Power,
    Channel::HeartRate,
    Channel::Cadence,
    Channel::Latitude,
    Channel::Longitude,
    Channel::Altitude,
    Channel::Speed,
];

pub fn parse_activity_file(path: &Path, subject_id: &str, source_device: u8) -> Result<ActivityStream> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_activity(BufReader::new(file), subject_id, source_device)
}

/// Reads one canonical activity from any reader.
pub fn read_activity<R: Read>(reader: R, subject_id: &str, source_device: u8) -> Result<ActivityStream> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| parse_error(&e))?,
        None => return Err(IngestError::Empty.into()),
    };
    if header.iter().ne(CANONICAL_HEADER.iter().copied()) {
        return Err(IngestError::Header {
            expected: CANONICAL_HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        }
        .into());
    }

    let mut samples = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| parse_error(&e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != CANONICAL_HEADER.len() {
            return Err(IngestError::Parse {
                line,
                message: format!("expected {} columns, found {}", CANONICAL_HEADER.len(), rec.len()),
            }
            .into());
        }
        let timestamp = rec[0].trim().parse::<i64>().map_err(|e| IngestError::Parse {
            line,
            message: format!("timestamp `{}`: {e}", &rec[0]),
        })?;
        let mut sample = SensorSample::at(timestamp);
        for (cell, channel) in rec.iter().skip(1).zip(COLUMN_CHANNELS) {
            let cell = cell.trim();
            if cell.is_empty() {
                continue;
            }
            let value = cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| IngestError::Parse {
                line,
                message: format!("{channel} `{cell}` is not a finite number"),
            })?;
            sample.set(channel, Some(value));
        }
        samples.push(sample);
    }

    validate_samples(&samples)?;
    Ok(ActivityStream {
        subject_id: subject_id.to_string(),
        start_time: samples[0].timestamp,
        samples,
        source_device,
    })
}

fn parse_error(e: &csv::Error) -> IngestError {
    IngestError::Parse {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

/// Writes the canonical format. Floats use Rust's shortest round-trip
/// representation so that reading the output back is bit-exact.
pub fn write_activity<W: Write>(stream: &ActivityStream, writer: W) -> std::io::Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "{}", CANONICAL_HEADER.join(","))?;
    let mut line = String::with_capacity(96);
    for s in &stream.samples {
        line.clear();
        line.push_str(&s.timestamp.to_string());
        for channel in COLUMN_CHANNELS {
            line.push(',');
            if let Some(v) = s.get(channel) {
                line.push_str(&v.to_string());
            }
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}

pub fn write_activity_file(stream: &ActivityStream, path: &Path) -> Result<()> {
    crate::io::write_atomic(path, |w| write_activity(stream, w))
}
