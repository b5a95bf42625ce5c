use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn cardioflux(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cardioflux"))
        .args(args)
        .current_dir(dir)
        .env_remove("CARDIOFLUX_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = cardioflux(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn snapshot(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            snapshot(&p, root, out);
        } else {
            out.insert(p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap());
        }
    }
}

fn chain(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    ok(dir, &["simulate", "--out", "sim", "--subjects", "3", "--days", "60", "--seed", "5"]);
    ok(dir, &["features", "--cohort", "sim", "--out", "feats"]);
    ok(dir, &["train", "--features", "feats", "--out", "models", "--mode", "personal", "--seed", "5"]);
    ok(dir, &["estimate", "--features", "feats", "--model", "models/model.json", "--out", "est"]);
    ok(
        dir,
        &["assimilate", "--cohort", "sim", "--features", "feats", "--estimates", "est/estimates.csv", "--out", "panels"],
    );
    ok(dir, &["report", "--panels", "panels/panels.json", "--summary", "est/summary.json", "--out", "report"]);
    let mut files = BTreeMap::new();
    snapshot(dir, dir, &mut files);
    files
}

#[test]
fn full_chain_is_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = chain(a.path());
    let fb = chain(b.path());
    assert_eq!(fa.len(), fb.len());
    for (name, bytes) in &fa {
        assert!(fb.get(name) == Some(bytes), "{name} differs");
    }
    for name in [
        "sim/manifest.json",
        "sim/run.json",
        "models/model.json",
        "est/estimates.csv",
        "est/eval.csv",
        "panels/panels.csv",
        "report/heatmap.svg",
        "report/heatmap.csv",
        "report/panel_s01.svg",
        "report/comparison.svg",
        "report/run.json",
    ] {
        assert!(fa.contains_key(name), "{name} missing");
    }
    let sidecar: serde_json::Value = serde_json::from_slice(&fa["report/run.json"]).unwrap();
    assert_eq!(sidecar["command"], "report");
    assert!(sidecar["outputs"].as_array().unwrap().len() >= 4);
}

#[test]
fn global_training_writes_table1() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["simulate", "--out", "sim", "--subjects", "4", "--days", "50", "--seed", "3"]);
    ok(d, &["features", "--cohort", "sim", "--out", "feats"]);
    ok(d, &["train", "--features", "feats", "--out", "m", "--mode", "global", "--seed", "3"]);
    let table = std::fs::read_to_string(d.join("m/table1.csv")).unwrap();
    assert!(table.starts_with(
        "Slope threshold (%),Test Set RMSE (Rel. Power),Training Set RMSE (Rel. Power),Training R Squared,Size of training set\n0+,"
    ));
    let out = ok(d, &["estimate", "--features", "feats", "--model", "m/model.json", "--out", "e"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("COMBINED"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["frobnicate"],
        vec!["simulate", "--out", "x"],
        vec!["simulate", "--out", "x", "--seed", "1", "--bogus"],
        vec!["train", "--features", "missing", "--out", "m", "--mode", "global", "--seed", "1"],
        vec!["train", "--features", ".", "--out", "m", "--mode", "sideways", "--seed", "1"],
    ] {
        let out = cardioflux(dir.path(), &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn domain_errors_exit_1_with_module_prefix() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("model.json"), "{\"format_version\": 99}").unwrap();
    std::fs::create_dir(dir.path().join("feats")).unwrap();
    std::fs::create_dir(dir.path().join("feats/s01")).unwrap();
    std::fs::write(dir.path().join("feats/s01/daily.csv"), "nope\n").unwrap();
    std::fs::write(dir.path().join("feats/s01/windows.csv"), "nope\n").unwrap();
    let out = cardioflux(dir.path(), &["estimate", "--features", "feats", "--model", "model.json", "--out", "e"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: config:"));

    let bad = dir.path().join("act.csv");
    std::fs::write(&bad, "t,power_w,hr_bpm,cadence_rpm,lat_deg,lon_deg,alt_m,speed_mps\n5,,,,,,,\n3,,,,,,,\n").unwrap();
    let out = cardioflux(dir.path(), &["ingest", "--input", "act.csv", "--out", "o.csv", "--subject", "s"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: ingest:"));
}

#[test]
fn ingest_splits_at_long_gap() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("t,power_w,hr_bpm,cadence_rpm,lat_deg,lon_deg,alt_m,speed_mps\n");
    for t in (0..100).chain(130..400) {
        csv.push_str(&format!("{t},200,140,90,,,,\n"));
    }
    std::fs::write(dir.path().join("a.csv"), csv).unwrap();
    ok(dir.path(), &["ingest", "--input", "a.csv", "--out", "aligned.csv", "--subject", "s01"]);
    let aligned = std::fs::read_to_string(dir.path().join("aligned.csv")).unwrap();
    assert_eq!(aligned.lines().count(), 1 + 270);
    let gaps: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("aligned.csv.gaps.json")).unwrap()).unwrap();
    assert_eq!(gaps["split_gaps"].as_array().unwrap().len(), 1);
    assert!(dir.path().join("aligned.csv.run.json").exists());
}

#[test]
fn help_documents_file_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in ["estimates.csv", "heatmap.csv", "CARDIOFLUX_THREADS", "simulate", "sweep"] {
        assert!(text.contains(needle), "{needle}");
    }
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let run = |value: &str| {
        Command::new(env!("CARGO_BIN_EXE_cardioflux"))
            .args(["simulate", "--out", "s", "--subjects", "1", "--days", "5", "--seed", "1"])
            .current_dir(dir.path())
            .env("CARDIOFLUX_THREADS", value)
            .output()
            .unwrap()
    };
    assert_eq!(run("0").status.code(), Some(2));
    assert_eq!(run("many").status.code(), Some(2));
    assert!(run("1").status.success());
}
