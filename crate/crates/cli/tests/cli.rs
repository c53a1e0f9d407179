use std::path::Path;
use std::process::{Command, Output};

use pathgauge_core::estimators::{missing_mass_g, ExceptionSet};
use pathgauge_core::geometry::GaugeSpec;
use pathgauge_core::nnindex::{prefix_min_indexed, Backend};
use pathgauge_core::processes::{embed, simulate, EmbeddingSpec, ProcessKind, ProcessSpec, DEFAULT_ZETA};
use pathgauge_core::seeds::derive;
use serde_json::Value;

fn pathgauge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathgauge")).args(args).output().expect("spawn pathgauge")
}

fn ok_json(args: &[&str]) -> Value {
    let out = pathgauge(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn error_json(args: &[&str]) -> Value {
    let out = pathgauge(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    serde_json::from_slice(&out.stderr).expect("json error")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bound_report_total() {
    let v = ok_json(&["bound", "--kind", "excess", "--estimate", "0", "--phi-tau", "0", "--n", "101", "--tau", "1", "--delta", "0.05"]);
    let total = v["report"]["total"].as_f64().unwrap();
    // e·ln(20)/100
    assert!((total - 0.081_432_446_021_301_15).abs() < 1e-15, "{total}");
    assert_eq!(v["report"]["estimator_term"].as_f64(), Some(0.0));
    assert_eq!(v["report"]["mixing_term"].as_f64(), Some(0.0));
}

#[test]
fn bound_from_a_reset_chain() {
    let v = ok_json(&["bound", "--kind", "risk", "--estimate", "0.1", "--process", "cycle:states=10,p=0.5", "--n", "50", "--tau", "2"]);
    assert_eq!(v["config"]["mixing"]["phi_tau"].as_f64(), Some(0.25));
    assert_eq!(v["report"]["mixing_term"].as_f64(), Some(0.25));
}

#[test]
fn estimate_on_a_csv_path() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("path.csv");
    std::fs::write(&file, "c0\n0\n1\n0.5\n0.25\n").unwrap();
    let v = ok_json(&["estimate", "--in", s(&file), "--tau", "1", "--gauge", "lipschitz:L=1", "--dump-profile"]);
    let g = v["g"].as_f64().unwrap();
    assert!((g - 0.583_333_333_333_333_3).abs() < 1e-15);
    assert_eq!(v["profile"]["mins"], serde_json::json!([1.0, 0.5, 0.25]));
    let indexed = ok_json(&["estimate", "--in", s(&file), "--tau", "1", "--backend", "indexed"]);
    assert_eq!(indexed["g"], v["g"]);
}

#[test]
fn study_on_a_cycle_without_resets_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    let long = dir.path().join("long.csv");
    let out = pathgauge(&[
        "study", "--process", "cycle:states=100,p=0", "--gauge", "discrete", "--tau", "100", "--sizes", "128,256,512,1024",
        "--p-list", "0", "--seeds", "4", "--out", s(&table), "--long-out", s(&long),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&table).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,n,tau,mean_g,std_g,tau_over_n"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[3].parse::<f64>().unwrap(), 0.0, "{row}");
    }
    let long_text = std::fs::read_to_string(&long).unwrap();
    assert!(long_text.starts_with("p,n,ln_n,series,value\n"));
    assert!(long_text.contains(",ln_g,-inf"));
    assert_eq!(long_text.lines().count(), 1 + 2 * 4);
}

#[test]
fn study_reports_skipped_sizes() {
    let out = pathgauge(&["study", "--process", "circle:p=0.1", "--sizes", "8,64,256", "--seeds", "2"]);
    assert!(out.status.success());
    // τ = 22 for p = 0.1 and ε = 0.1.
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipping n=8"));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 3);
}

#[test]
fn simulate_then_estimate_matches_in_process() {
    let dir = tempfile::tempdir().unwrap();
    let kind = ProcessKind::CircleRotation { zeta: DEFAULT_ZETA, reset: 0.2 };
    let emb = EmbeddingSpec::Fourier { dim: 6 };
    let path = embed(&emb, &simulate(&ProcessSpec::new(kind, derive(42, "simulate", 0)), 300).unwrap()).unwrap();
    let profile = prefix_min_indexed(&path, &GaugeSpec::lipschitz(1.0), 3, &ExceptionSet::empty(297), Backend::Naive).unwrap();
    let expected = missing_mass_g(&profile.profile).unwrap();

    for ext in ["csv", "bin", "json"] {
        let file = dir.path().join(format!("path.{ext}"));
        let out = pathgauge(&["simulate", "--process", "circle:p=0.2", "--embedding", "fourier:dim=6", "--n", "300", "--seed", "42", "--out", s(&file)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        if ext == "json" {
            // The JSON document wraps the points with the config.
            let doc: Value = serde_json::from_slice(&std::fs::read(&file).unwrap()).unwrap();
            assert_eq!(doc["points"].as_array().unwrap().len(), 300);
            continue;
        }
        let v = ok_json(&["estimate", "--in", s(&file), "--tau", "3"]);
        assert_eq!(v["g"].as_f64().unwrap().to_bits(), expected.to_bits(), "{ext}");
    }
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for f in [&a, &b] {
        assert!(pathgauge(&["simulate", "--process", "torus:p=0.1", "--embedding", "raster-scaled", "--n", "50", "--seed", "7", "--out", s(f)]).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let validate = |threads: &str| {
        pathgauge(&[
            "--threads", threads, "validate", "--validator", "theorem1", "--process", "cycle:states=16,p=0.5", "--gauge",
            "lipschitz:L=1,metric=discrete", "--tau", "4", "--t", "0.5", "--n", "64", "--delta", "0.1", "--trials", "200", "--seed", "3",
        ])
        .stdout
    };
    let one = validate("1");
    assert!(!one.is_empty());
    assert_eq!(one, validate("4"));

    let study = |threads: &str| {
        pathgauge(&["--threads", threads, "study", "--process", "circle:p=0.5", "--sizes", "16,64,256", "--seeds", "5", "--format", "json"]).stdout
    };
    assert_eq!(study("1"), study("3"));
}

#[test]
fn validators_report_json() {
    let v = ok_json(&["validate", "--validator", "lemma1", "--chain", "markov:p01=0.1,p10=0.2,q0=0.1,q1=0.9", "--n", "200", "--trials", "500"]);
    assert_eq!(v["report"]["trials"].as_u64(), Some(500));
    assert_eq!(v["report"]["pass"].as_bool(), Some(true));
    let v = ok_json(&["validate", "--validator", "good-turing", "--symbols", "20", "--n", "100", "--t", "0.5", "--trials", "200"]);
    assert!(v["report"]["rms"].as_f64().unwrap() <= v["report"]["bound"].as_f64().unwrap());
}

#[test]
fn errors_are_machine_readable() {
    let e = error_json(&["bound", "--kind", "excess", "--estimate", "0", "--n", "101", "--tau", "1", "--delta", "1.5"]);
    assert_eq!(e["error"]["kind"], "invalid_parameter");
    let e = error_json(&["study", "--process", "spiral:p=1"]);
    assert_eq!(e["error"]["kind"], "invalid_argument");
    let e = error_json(&["validate", "--validator", "lemma1", "--n", "10", "--trials", "5"]);
    assert_eq!(e["error"]["kind"], "invalid_parameter");
    let e = error_json(&["validate", "--validator", "theorem1", "--process", "cycle:states=16,p=0", "--tau", "2", "--t", "0.5", "--n", "20"]);
    assert_eq!(e["error"]["kind"], "unsupported_process");

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("path.csv");
    std::fs::write(&file, "c0\n0\n1\n").unwrap();
    let e = error_json(&["estimate", "--in", s(&file), "--tau", "2"]);
    assert_eq!(e["error"]["kind"], "invalid_argument");
    std::fs::write(&file, "symbol\n1\n2\n3\n").unwrap();
    let e = error_json(&["estimate", "--in", s(&file), "--tau", "1", "--gauge", "smooth:gamma=1"]);
    assert_eq!(e["error"]["kind"], "variant_mismatch");
    let e = error_json(&["estimate", "--in", s(&dir.path().join("missing.csv")), "--tau", "1"]);
    assert_eq!(e["error"]["kind"], "io");
}
