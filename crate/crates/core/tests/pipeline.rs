use std::collections::BTreeMap;
use std::path::Path;

use cardioflux::biovars::BioVarConfig;
use cardioflux::estimators::{Mode, ProtocolConfig};
use cardioflux::features::FeatureOptions;
use cardioflux::ingest::ResampleOptions;
use cardioflux::pipeline::*;
use cardioflux::synth::{gen_cohort, simulate_features, SynthConfig};

fn config() -> SynthConfig {
    SynthConfig {
        n_subjects: 4,
        days: 70,
        seed: 11,
        ..SynthConfig::default()
    }
}

fn run_chain(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let cohort = root.join("sim");
    gen_cohort(&config(), &cohort).unwrap();
    let feats = root.join("features");
    extract_features(&cohort, 8, &FeatureOptions::default(), &ResampleOptions::default(), &feats).unwrap();
    let loaded = load_features(&feats).unwrap();
    let (model, _) = train_stage(&loaded, Mode::Personal, 11, &ProtocolConfig::default(), &root.join("models")).unwrap();
    estimate_stage(&loaded, &model, &root.join("est")).unwrap();
    let (panels, _) = assimilate_stage(
        &cohort,
        &feats,
        Some(&root.join("est/estimates.csv")),
        &BioVarConfig::default(),
        &root.join("panels"),
    )
    .unwrap();
    let summary = load_summary(&root.join("est/summary.json")).unwrap();
    report_stage(&panels, &summary, &root.join("report")).unwrap();

    let mut files = BTreeMap::new();
    for stage in ["features", "models", "est", "panels", "report"] {
        collect(&root.join(stage), root, &mut files);
    }
    files
}

fn collect(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            collect(&p, root, out);
        } else {
            let rel = p.strip_prefix(root).unwrap().display().to_string();
            out.insert(rel, std::fs::read(&p).unwrap());
        }
    }
}

#[test]
fn chain_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = run_chain(a.path());
    let fb = run_chain(b.path());
    assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>());
    for (k, v) in &fa {
        assert!(v == &fb[k], "{k} differs between runs");
    }
    for name in ["report/heatmap.svg", "report/heatmap.csv", "report/panel_s01.svg", "report/comparison.svg", "panels/panels.json"] {
        assert!(fa.contains_key(name), "{name} missing");
    }
    let heat = String::from_utf8(fa["report/heatmap.csv"].clone()).unwrap();
    assert_eq!(heat.lines().count(), 5);
}

#[test]
fn disk_features_match_in_memory_features() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig {
        n_subjects: 2,
        days: 30,
        ..config()
    };
    gen_cohort(&cfg, dir.path()).unwrap();
    let feats = dir.path().join("f");
    extract_features(dir.path(), 8, &FeatureOptions::default(), &ResampleOptions::default(), &feats).unwrap();
    let from_disk = load_features(&feats).unwrap();
    let in_memory = simulate_features(&cfg, &FeatureOptions::default()).unwrap();
    assert_eq!(from_disk.len(), 2);
    for (d, m) in from_disk.iter().zip(&in_memory) {
        assert_eq!(d, &m.features);
    }
}

#[test]
fn home_zip_and_environment_reach_panels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig {
        n_subjects: 3,
        days: 30,
        ..config()
    };
    gen_cohort(&cfg, dir.path()).unwrap();
    let feats = dir.path().join("f");
    extract_features(dir.path(), 8, &FeatureOptions::default(), &ResampleOptions::default(), &feats).unwrap();
    let (panels, _) = assimilate_stage(dir.path(), &feats, None, &BioVarConfig::default(), &dir.path().join("p")).unwrap();
    assert_eq!(panels.len(), 3);
    for p in &panels {
        assert!(p.raw[&cardioflux::biovars::BioVar::Pm25].is_some());
        assert!(p.raw[&cardioflux::biovars::BioVar::Crf].is_none());
        assert!((0.0..=1.0).contains(&p.heart_score));
    }
}
