//! File-level pipeline stages. Each stage reads and writes a fixed directory
//! layout so the stages can run as separate commands:
//!
//! ```text
//! <cohort>/cohort/<subject>/profile.toml, activities/<date>_dev<k>.csv
//! <cohort>/geo/zips.csv, env/*.csv, landmarks.csv
//! <features>/<subject>/daily.csv, windows.csv, starts.csv
//! <models>/model.json [, table1.csv]
//! <estimates>/estimates.csv, eval.csv, summary.json
//! <panels>/panels.json, panels.csv
//! <report>/heatmap.*, panel_<subject>.*, comparison.*
//! ```
//!
//! Outputs depend only on inputs and seeds, so rerunning a stage reproduces
//! its files byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveTime};
use rayon::prelude::*;

use crate::biovars::{
    assemble_panels, raw_bio_variables, read_landmarks, write_panels, BioVarConfig, BioVariablePanel, SubjectInputs,
};
use crate::enviro::{infer_home_zip, join_environment, EnvTable, GeoLookupTable};
use crate::error::{EnviroError, Error, IngestError, Result};
use crate::estimators::{
    estimate, memory_sweep, table1, train, write_estimates, write_eval, write_sweep, write_table1, Estimates, Mode,
    ModelFile, ProtocolConfig, Source, SweepRow,
};
use crate::features::{activity_features, read_daily, read_windows, write_daily, write_windows, ActivityFeatures, FeatureOptions, SubjectFeatures};
use crate::ingest::{parse_activity_file, resample_align, write_activity, AthleteProfile, GapReport, ResampleOptions};
use crate::io::{read_string, write_atomic, write_string};
use crate::report::{emit_cohort_heatmap, emit_model_comparison, emit_subject_panel, CohortSummary, ComparisonRow};

pub const STARTS_HEADER: [&str; 4] = ["date", "start_local", "lat", "lon"];

fn write_with<F>(path: &Path, f: F) -> Result<PathBuf>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    write_atomic(path, |w| std::io::Write::write_all(w, &buf))?;
    Ok(path.to_path_buf())
}

fn sorted_dirs(root: &Path) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        if entry.file_type().map_err(|e| Error::io(entry.path(), e))?.is_dir() {
            out.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    out.sort();
    Ok(out)
}

/// Subject directories under `<cohort>/cohort`, sorted.
pub fn cohort_subjects(cohort_root: &Path) -> Result<Vec<String>> {
    sorted_dirs(&cohort_root.join("cohort"))
}

fn profile_path(cohort_root: &Path, sid: &str) -> PathBuf {
    cohort_root.join("cohort").join(sid).join("profile.toml")
}

/// Parses and 1 Hz-aligns one activity file, writing the canonical result.
pub fn ingest_file(input: &Path, subject_id: &str, device: u8, opts: &ResampleOptions, out: &Path) -> Result<GapReport> {
    let raw = parse_activity_file(input, subject_id, device)?;
    let aligned = resample_align(&raw, opts)?;
    write_atomic(out, |w| write_activity(&aligned.stream, w))?;
    Ok(aligned.report)
}

/// Summary of a feature extraction run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureRun {
    pub subjects: Vec<String>,
    pub n_activities: usize,
    /// `(file, reason)` for activities too short to keep.
    pub skipped: Vec<(String, String)>,
    pub written: Vec<PathBuf>,
}

/// Extracts per-day and per-window features from every `_dev<device>.csv`
/// activity of every subject. Subjects without such files are left out.
pub fn extract_features(
    cohort_root: &Path,
    device: u8,
    opts: &FeatureOptions,
    resample: &ResampleOptions,
    out_dir: &Path,
) -> Result<FeatureRun> {
    let suffix = format!("_dev{device}.csv");
    let per_subject: Vec<Option<FeatureRun>> = cohort_subjects(cohort_root)?
        .par_iter()
        .map(|sid| {
            let athlete = AthleteProfile::load(&profile_path(cohort_root, sid))?;
            let act_dir = cohort_root.join("cohort").join(sid).join("activities");
            let mut files: Vec<PathBuf> = match fs::read_dir(&act_dir) {
                Ok(rd) => rd
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.file_name().is_some_and(|n| n.to_string_lossy().ends_with(&suffix)))
                    .collect(),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
                Err(e) => return Err(Error::io(&act_dir, e)),
            };
            if files.is_empty() {
                log::warn!("{sid}: no activities recorded by device {device}");
                return Ok(None);
            }
            files.sort();
            let mut run = FeatureRun::default();
            let mut acts = Vec::with_capacity(files.len());
            for path in &files {
                let raw = parse_activity_file(path, sid, device)?;
                match resample_align(&raw, resample) {
                    Ok(r) => acts.push(activity_features(&r.stream, &athlete, opts)),
                    Err(e @ IngestError::TooShort { .. }) => {
                        log::warn!("{}: skipped: {e}", path.display());
                        run.skipped.push((path.display().to_string(), e.to_string()));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            run.n_activities = acts.len();
            run.written = write_subject_features(&out_dir.join(sid), sid, acts)?;
            run.subjects.push(sid.clone());
            Ok(Some(run))
        })
        .collect::<Result<_>>()?;
    let mut total = FeatureRun::default();
    for run in per_subject.into_iter().flatten() {
        total.subjects.extend(run.subjects);
        total.n_activities += run.n_activities;
        total.skipped.extend(run.skipped);
        total.written.extend(run.written);
    }
    if total.subjects.is_empty() {
        return Err(Error::Config(format!("no subject has activities from device {device}")));
    }
    Ok(total)
}

fn write_subject_features(dir: &Path, sid: &str, mut acts: Vec<ActivityFeatures>) -> Result<Vec<PathBuf>> {
    acts.sort_by_key(|a| (a.date, a.start_local));
    let starts: Vec<(NaiveDate, NaiveTime, Option<(f64, f64)>)> =
        acts.iter().map(|a| (a.date, a.start_local, a.start_position)).collect();
    let features = SubjectFeatures::from_activities(sid, acts);
    Ok(vec![
        write_with(&dir.join("daily.csv"), |b| write_daily(&features.daily, b))?,
        write_with(&dir.join("windows.csv"), |b| write_windows(&features.windows, b))?,
        write_with(&dir.join("starts.csv"), |b| write_starts(&starts, b))?,
    ])
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

fn write_starts(rows: &[(NaiveDate, NaiveTime, Option<(f64, f64)>)], buf: &mut Vec<u8>) -> Result<()> {
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(STARTS_HEADER).map_err(csv_err)?;
    for (date, time, pos) in rows {
        w.write_record([
            date.to_string(),
            time.format("%H:%M:%S").to_string(),
            pos.map(|p| p.0.to_string()).unwrap_or_default(),
            pos.map(|p| p.1.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("csv: {e}")))
}

/// Activity start coordinates in chronological order; starts without a
/// position are skipped.
pub fn read_starts(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = read_string(path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    crate::features::check_header(r.headers().map_err(csv_err)?, &STARTS_HEADER)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        if rec[2].is_empty() || rec[3].is_empty() {
            continue;
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Config(format!("{}: bad coordinate `{s}`", path.display())));
        out.push((num(&rec[2])?, num(&rec[3])?));
    }
    Ok(out)
}

/// Reads every `<features>/<subject>/` directory, sorted by subject id.
pub fn load_features(features_dir: &Path) -> Result<Vec<SubjectFeatures>> {
    let subjects = sorted_dirs(features_dir)?;
    if subjects.is_empty() {
        return Err(Error::Config(format!("{}: no subject feature directories", features_dir.display())));
    }
    subjects
        .into_iter()
        .map(|sid| {
            let dir = features_dir.join(&sid);
            let daily = read_daily(read_string(&dir.join("daily.csv"))?.as_bytes())?;
            let windows = read_windows(read_string(&dir.join("windows.csv"))?.as_bytes())?;
            Ok(SubjectFeatures {
                subject_id: sid,
                daily,
                windows,
            })
        })
        .collect()
}

/// Trains estimators and writes `model.json`; global mode also writes the
/// VAM bank report as `table1.csv`.
pub fn train_stage(
    cohort: &[SubjectFeatures],
    mode: Mode,
    seed: u64,
    cfg: &ProtocolConfig,
    out_dir: &Path,
) -> Result<(ModelFile, Vec<PathBuf>)> {
    let model = train(cohort, mode, seed, cfg)?;
    let model_path = out_dir.join("model.json");
    write_string(&model_path, &(model.to_json() + "\n"))?;
    let mut written = vec![model_path];
    if mode == Mode::Global {
        let rows = table1(cohort, seed)?;
        written.push(write_with(&out_dir.join("table1.csv"), |b| write_table1(&rows, b))?);
    }
    Ok((model, written))
}

/// Applies a model file and writes predictions, the evaluation table and a
/// per-source summary used by the comparison chart.
pub fn estimate_stage(cohort: &[SubjectFeatures], model: &ModelFile, out_dir: &Path) -> Result<(Estimates, Vec<PathBuf>)> {
    let est = estimate(cohort, model)?;
    let summary = ComparisonRow::from_estimates(model.mode, &est);
    let written = vec![
        write_with(&out_dir.join("estimates.csv"), |b| write_estimates(&est, b))?,
        write_with(&out_dir.join("eval.csv"), |b| write_eval(&est, b))?,
        {
            let path = out_dir.join("summary.json");
            write_string(&path, &(serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"))?;
            path
        },
    ];
    Ok((est, written))
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    ModelFile::from_json(&read_string(path)?)
}

/// Latest fused VO2max estimate per subject from an `estimates.csv`.
pub fn latest_estimates(path: &Path) -> Result<BTreeMap<String, f64>> {
    let text = read_string(path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("{}: missing column `{name}`", path.display())))
    };
    let (sid, date, combined) = (col("subject_id")?, col("date")?, col(&Source::Combined.name().to_lowercase())?);
    let mut latest: BTreeMap<String, (NaiveDate, f64)> = BTreeMap::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let Ok(Some(v)) = crate::io::parse_opt(&rec[combined]) else { continue };
        let d = NaiveDate::parse_from_str(&rec[date], "%Y-%m-%d")
            .map_err(|_| Error::Config(format!("{}: bad date `{}`", path.display(), &rec[date])))?;
        let slot = latest.entry(rec[sid].to_string()).or_insert((d, v));
        if d >= slot.0 {
            *slot = (d, v);
        }
    }
    Ok(latest.into_iter().map(|(k, (_, v))| (k, v)).collect())
}

/// Environment tables in `<cohort>/env`, by file name. Later files override
/// earlier ones on conflicts.
fn load_env_tables(dir: &Path) -> Result<Vec<EnvTable>> {
    let mut paths: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(Error::io(dir, e)),
    };
    paths.sort();
    paths.iter().map(|p| EnvTable::load(p)).collect()
}

/// Builds cohort-normalized panels for every subject with features, dated at
/// each subject's last activity day, and writes `panels.json` and
/// `panels.csv`. Subjects without an estimate get no CRF-derived values.
pub fn assimilate_stage(
    cohort_root: &Path,
    features_dir: &Path,
    estimates: Option<&Path>,
    cfg: &BioVarConfig,
    out_dir: &Path,
) -> Result<(Vec<BioVariablePanel>, Vec<PathBuf>)> {
    let features = load_features(features_dir)?;
    let crf = estimates.map(latest_estimates).transpose()?.unwrap_or_default();
    let geo_path = cohort_root.join("geo").join("zips.csv");
    let geo = GeoLookupTable::read_csv(&geo_path.display().to_string(), read_string(&geo_path)?.as_bytes())?;
    let env = load_env_tables(&cohort_root.join("env"))?;
    let landmarks_path = cohort_root.join("landmarks.csv");
    let landmarks = if landmarks_path.exists() {
        read_landmarks(read_string(&landmarks_path)?.as_bytes())?
    } else {
        BTreeMap::new()
    };

    let mut raws = Vec::with_capacity(features.len());
    for f in &features {
        let sid = &f.subject_id;
        let athlete = AthleteProfile::load(&profile_path(cohort_root, sid))?;
        let as_of = f
            .last_date()
            .ok_or_else(|| Error::Config(format!("{sid}: no activity days")))?;
        let starts = read_starts(&features_dir.join(sid).join("starts.csv"))?;
        let environment = match infer_home_zip(&starts, &geo) {
            Ok(zip) => match join_environment(&zip, &env) {
                Ok(record) => Some(record),
                Err(EnviroError::ZipNotFound(z)) => {
                    log::warn!("{sid}: home zip {z} has no environment data");
                    None
                }
                Err(e) => return Err(e.into()),
            },
            Err(e) => {
                log::warn!("{sid}: home zip unknown: {e}");
                None
            }
        };
        let inputs = SubjectInputs {
            athlete: &athlete,
            as_of,
            daily: &f.daily,
            crf: crf.get(sid).copied(),
            landmarks: landmarks.get(sid).cloned(),
            environment: environment.as_ref(),
        };
        raws.push(raw_bio_variables(&inputs, cfg)?);
    }
    let panels = assemble_panels(&raws, cfg)?;
    let json_path = out_dir.join("panels.json");
    write_string(&json_path, &(serde_json::to_string_pretty(&panels).expect("panels serialize") + "\n"))?;
    let csv_path = write_with(&out_dir.join("panels.csv"), |b| write_panels(&panels, b))?;
    Ok((panels, vec![json_path, csv_path]))
}

pub fn load_panels(path: &Path) -> Result<Vec<BioVariablePanel>> {
    serde_json::from_str(&read_string(path)?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn load_summary(path: &Path) -> Result<Vec<ComparisonRow>> {
    serde_json::from_str(&read_string(path)?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Heat map, one panel per subject, and a comparison chart when
/// `comparison` is nonempty.
pub fn report_stage(panels: &[BioVariablePanel], comparison: &[ComparisonRow], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let summary = CohortSummary::from_panels(panels)?;
    let mut written = emit_cohort_heatmap(&summary, out_dir)?;
    let per_panel: Vec<Vec<PathBuf>> = panels
        .par_iter()
        .map(|p| emit_subject_panel(p, out_dir))
        .collect::<Result<_>>()?;
    written.extend(per_panel.into_iter().flatten());
    if !comparison.is_empty() {
        written.extend(emit_model_comparison(comparison, out_dir)?);
    }
    Ok(written)
}

/// Memory sweep table plus its comparison chart.
pub fn sweep_stage(
    cohort: &[SubjectFeatures],
    spans: &[u32],
    seed: u64,
    cfg: &ProtocolConfig,
    out_dir: &Path,
) -> Result<(Vec<SweepRow>, Vec<PathBuf>)> {
    let rows = memory_sweep(cohort, spans, seed, cfg)?;
    let mut written = vec![write_with(&out_dir.join("sweep.csv"), |b| write_sweep(&rows, b))?];
    written.extend(emit_model_comparison(&ComparisonRow::from_sweep(&rows), out_dir)?);
    Ok((rows, written))
}
