mod sidecar;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cardioflux::biovars::BioVarConfig;
use cardioflux::estimators::{Mode, ProtocolConfig, DEFAULT_SPAN_DAYS};
use cardioflux::features::FeatureOptions;
use cardioflux::ingest::ResampleOptions;
use cardioflux::pipeline;
use cardioflux::synth::{gen_cohort, SynthConfig};
use cardioflux::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use sidecar::{digest, FileDigest, RunMetadata};

const SCHEMAS: &str = "\
File formats (CSV files have a header row; empty cells mean absent):

  activity CSV      t,power_w,hr_bpm,cadence_rpm,lat_deg,lon_deg,alt_m,speed_mps
                    t in Unix seconds (UTC); W, bpm, rpm, degrees, m, m/s
  daily.csv         date,active_time_s,trimp,best_4min_rel_power_wkg,work_kj,hrr60_bpm,
                    hr_drift_pct_per_h,start_time_local,n_activities
  windows.csv       date,activity,window_start,duration_s,mean_rel_power_wkg,vam_m_per_h,
                    max_slope_pct,mean_hr_bpm
  starts.csv        date,start_local,lat,lon
  table1.csv        Slope threshold (%),Test Set RMSE (Rel. Power),Training Set RMSE (Rel. Power),
                    Training R Squared,Size of training set
  estimates.csv     subject_id,date,truth,time,trimp,vam,combined,w_time,w_trimp,w_vam
                    (VO2max in mL/kg/min; w_* are fusion weights)
  eval.csv          scope,source,rmse,r2,n  (scope is `all` or a subject id)
  sweep.csv         span_days,source,n_subjects,mean_rmse,ci_low,ci_high,default,flagged
  panels.csv        subject_id,age,<raw bio-variables>,<summary scores>
  heatmap.csv       subject_id,age,<[0,1] variables in display order>, rows sorted by age
  geo/zips.csv      zip,lat,lon
  env/*.csv         zip,income_usd | zip,pm25 | zip,light_index | zip,noise_db |
                    county_or_zip,crime_index | county_or_zip,cardiac_death_per100k
  landmarks.csv     subject_id,left_zygion_x,left_zygion_y,right_zygion_x,right_zygion_y,
                    upper_lip_x,upper_lip_y,brow_x,brow_y

Every command writes a run.json sidecar (inputs and outputs with SHA-256
digests, options, seed, tool version) next to its outputs.

Environment: CARDIOFLUX_THREADS caps worker threads; RUST_LOG sets log level.
Exit status: 0 success, 1 pipeline error, 2 usage error.";

#[derive(Parser, Debug)]
#[command(name = "cardioflux", version, about = "Cardiovascular health-state estimation from wearable streams")]
#[command(after_long_help = SCHEMAS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic cohort with known fitness trajectories.
    Simulate(SimulateArgs),
    /// Parse one activity CSV and align it to 1 Hz.
    Ingest(IngestArgs),
    /// Extract per-day and per-window features from a cohort directory.
    Features(FeaturesArgs),
    /// Fit TIME, TRIMP and VAM estimators with inverse-error fusion.
    Train(TrainArgs),
    /// Apply a model file to the held-out part of the cohort.
    Estimate(EstimateArgs),
    /// Build cohort-normalized bio-variable panels.
    Assimilate(AssimilateArgs),
    /// Render heat map, subject panels and estimator comparison.
    Report(ReportArgs),
    /// Compare estimator errors across load-window spans.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Preset {
    Default,
    Noiseless,
    Stationary,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Global,
    Personal,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Global => Mode::Global,
            ModeArg::Personal => Mode::Personal,
        }
    }
}

fn existing_path(s: &str) -> std::result::Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.exists() {
        Ok(p)
    } else {
        Err(format!("`{s}` does not exist"))
    }
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    /// Output directory for the cohort.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    subjects: Option<usize>,
    #[arg(long)]
    days: Option<u32>,
    #[arg(long, value_enum, default_value_t = Preset::Default)]
    preset: Preset,
    /// TOML file with simulator settings; flags take precedence.
    #[arg(long, value_parser = existing_path)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct IngestArgs {
    #[arg(long, value_parser = existing_path)]
    input: PathBuf,
    /// Aligned canonical CSV to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    subject: String,
    #[arg(long, default_value_t = 8)]
    device: u8,
    /// Longest dropout (missing seconds) that is filled rather than split.
    #[arg(long, default_value_t = 5)]
    gap_split_seconds: i64,
    #[arg(long, default_value_t = 60)]
    min_duration_s: i64,
}

#[derive(Args, Debug, Serialize)]
struct FeaturesArgs {
    /// Cohort directory (as written by `simulate`).
    #[arg(long, value_parser = existing_path)]
    cohort: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Only use activity files recorded by this device.
    #[arg(long, default_value_t = 8)]
    device: u8,
    /// TOML file with feature options.
    #[arg(long, value_parser = existing_path)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct TrainArgs {
    #[arg(long, value_parser = existing_path)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    span_days: Option<u32>,
    /// TOML file with protocol settings; flags take precedence.
    #[arg(long, value_parser = existing_path)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EstimateArgs {
    #[arg(long, value_parser = existing_path)]
    features: PathBuf,
    #[arg(long, value_parser = existing_path)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct AssimilateArgs {
    #[arg(long, value_parser = existing_path)]
    cohort: PathBuf,
    #[arg(long, value_parser = existing_path)]
    features: PathBuf,
    /// estimates.csv supplying each subject's latest fused VO2max.
    #[arg(long, value_parser = existing_path)]
    estimates: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// TOML file with bio-variable settings.
    #[arg(long, value_parser = existing_path)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ReportArgs {
    /// panels.json written by `assimilate`.
    #[arg(long, value_parser = existing_path)]
    panels: PathBuf,
    /// summary.json files written by `estimate`, one per comparison group.
    #[arg(long, value_parser = existing_path)]
    summary: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long, value_parser = existing_path)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "14,28,42,56,70")]
    spans: Vec<u32>,
}

fn load_toml<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = cardioflux::io::read_string(p)?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn digests(paths: &[PathBuf]) -> Result<Vec<FileDigest>> {
    let mut sorted: Vec<&PathBuf> = paths.iter().collect();
    sorted.sort();
    sorted.into_iter().map(|p| digest(p)).collect()
}

fn finish<T: Serialize>(
    command: &'static str,
    seed: Option<u64>,
    options: &T,
    inputs: &[PathBuf],
    outputs: &[PathBuf],
    sidecar_path: &Path,
) -> Result<()> {
    let meta = RunMetadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed,
        options,
        inputs: digests(inputs)?,
        outputs: digests(outputs)?,
    };
    sidecar::write(sidecar_path, &meta)?;
    log::info!("{command}: wrote {} files", outputs.len());
    Ok(())
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let base = match a.preset {
        Preset::Default => SynthConfig::default(),
        Preset::Noiseless => SynthConfig::noiseless(),
        Preset::Stationary => SynthConfig::stationary(),
    };
    let mut cfg = match &a.config {
        Some(p) => {
            let text = cardioflux::io::read_string(p)?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => base,
    };
    cfg.seed = a.seed;
    if let Some(n) = a.subjects {
        cfg.n_subjects = n;
    }
    if let Some(d) = a.days {
        cfg.days = d;
    }
    let manifest = gen_cohort(&cfg, &a.out)?;
    let inputs: Vec<PathBuf> = a.config.iter().cloned().collect();
    println!(
        "simulated {} subjects, {} activities -> {}",
        manifest.n_subjects,
        manifest.n_activities,
        a.out.display()
    );
    finish("simulate", Some(a.seed), a, &inputs, &[a.out.join("manifest.json")], &a.out.join("run.json"))
}

fn ingest(a: &IngestArgs) -> Result<()> {
    let opts = ResampleOptions {
        gap_split_seconds: a.gap_split_seconds,
        min_duration_s: a.min_duration_s,
    };
    let report = pipeline::ingest_file(&a.input, &a.subject, a.device, &opts, &a.out)?;
    let gaps_path = PathBuf::from(format!("{}.gaps.json", a.out.display()));
    cardioflux::io::write_string(&gaps_path, &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;
    println!(
        "{} segment(s), kept #{}, {} split gap(s), {} filled gap(s)",
        report.segments,
        report.kept_segment,
        report.split_gaps.len(),
        report.filled_gaps.len()
    );
    let sidecar = PathBuf::from(format!("{}.run.json", a.out.display()));
    finish("ingest", None, a, &[a.input.clone()], &[a.out.clone(), gaps_path], &sidecar)
}

fn features(a: &FeaturesArgs) -> Result<()> {
    let opts: FeatureOptions = load_toml(a.config.as_deref())?;
    let run = pipeline::extract_features(&a.cohort, a.device, &opts, &ResampleOptions::default(), &a.out)?;
    println!(
        "{} subjects, {} activities, {} skipped -> {}",
        run.subjects.len(),
        run.n_activities,
        run.skipped.len(),
        a.out.display()
    );
    let mut inputs = vec![a.cohort.clone()];
    inputs.extend(a.config.iter().cloned());
    finish("features", None, a, &inputs, &run.written, &a.out.join("run.json"))
}

fn protocol_config(path: Option<&Path>, span_days: Option<u32>) -> Result<ProtocolConfig> {
    let mut cfg: ProtocolConfig = load_toml(path)?;
    if let Some(s) = span_days {
        cfg.span_days = s;
    }
    Ok(cfg)
}

fn train(a: &TrainArgs) -> Result<()> {
    let cfg = protocol_config(a.config.as_deref(), a.span_days)?;
    let cohort = pipeline::load_features(&a.features)?;
    let (model, written) = pipeline::train_stage(&cohort, a.mode.into(), a.seed, &cfg, &a.out)?;
    println!("trained {} model set(s) -> {}", model.models.len(), a.out.display());
    let mut inputs = vec![a.features.clone()];
    inputs.extend(a.config.iter().cloned());
    finish("train", Some(a.seed), a, &inputs, &written, &a.out.join("run.json"))
}

fn estimate(a: &EstimateArgs) -> Result<()> {
    let cohort = pipeline::load_features(&a.features)?;
    let model = pipeline::load_model(&a.model)?;
    let (est, written) = pipeline::estimate_stage(&cohort, &model, &a.out)?;
    for (source, r) in &est.reports {
        println!("{:<9} rmse {:.3}  r2 {:.3}  n {}", source.name(), r.rmse, r.r2, r.n);
    }
    finish(
        "estimate",
        Some(model.seed),
        a,
        &[a.features.clone(), a.model.clone()],
        &written,
        &a.out.join("run.json"),
    )
}

fn assimilate(a: &AssimilateArgs) -> Result<()> {
    let cfg: BioVarConfig = load_toml(a.config.as_deref())?;
    let (panels, written) = pipeline::assimilate_stage(&a.cohort, &a.features, a.estimates.as_deref(), &cfg, &a.out)?;
    println!("{} panels -> {}", panels.len(), a.out.display());
    let mut inputs = vec![a.cohort.clone(), a.features.clone()];
    inputs.extend(a.estimates.iter().cloned());
    inputs.extend(a.config.iter().cloned());
    finish("assimilate", None, a, &inputs, &written, &a.out.join("run.json"))
}

fn report(a: &ReportArgs) -> Result<()> {
    let panels = pipeline::load_panels(&a.panels)?;
    let mut rows = Vec::new();
    for s in &a.summary {
        rows.extend(pipeline::load_summary(s)?);
    }
    let written = pipeline::report_stage(&panels, &rows, &a.out)?;
    println!("{} files -> {}", written.len(), a.out.display());
    let mut inputs = vec![a.panels.clone()];
    inputs.extend(a.summary.iter().cloned());
    finish("report", None, a, &inputs, &written, &a.out.join("run.json"))
}

fn sweep(a: &SweepArgs) -> Result<()> {
    let cohort = pipeline::load_features(&a.features)?;
    let (rows, written) = pipeline::sweep_stage(&cohort, &a.spans, a.seed, &ProtocolConfig::default(), &a.out)?;
    for r in &rows {
        let mark = if r.span_days == DEFAULT_SPAN_DAYS { " (default)" } else { "" };
        println!(
            "span {:>3}{mark}  {:<5} mean rmse {:.3}  95% CI [{}, {}]",
            r.span_days,
            r.source.name(),
            r.mean_rmse,
            r.ci_low.map_or("-".into(), |v| format!("{v:.3}")),
            r.ci_high.map_or("-".into(), |v| format!("{v:.3}")),
        );
    }
    finish("sweep", Some(a.seed), a, &[a.features.clone()], &written, &a.out.join("run.json"))
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Ingest(a) => ingest(a),
        Command::Features(a) => features(a),
        Command::Train(a) => train(a),
        Command::Estimate(a) => estimate(a),
        Command::Assimilate(a) => assimilate(a),
        Command::Report(a) => report(a),
        Command::Sweep(a) => sweep(a),
    }
}

/// Applies `CARDIOFLUX_THREADS` to the global worker pool.
fn configure_threads() -> std::result::Result<(), String> {
    let Ok(value) = std::env::var("CARDIOFLUX_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("CARDIOFLUX_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
