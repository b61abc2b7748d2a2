use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use hilbert_pair::cli::FilterBankDocument;

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hilbert-pair"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn design_file(dir: &Path, l: &str, m: &str, phase: &str) -> std::path::PathBuf {
    let out = dir.join(format!("bank_{l}_{m}_{phase}.json"));
    let o = bin(
        &["design", "--L", l, "--M", m, "--phase", phase, "--out", out.to_str().unwrap()],
        dir,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(o.stderr.trim_ascii()).unwrap()
}

#[test]
fn design_document_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = design_file(dir.path(), "2", "3", "mid");
    let text = std::fs::read_to_string(&path).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["L"], 2);
    assert_eq!(v["M"], 3);
    assert_eq!(v["phase"], "mid");
    assert_eq!(v["method"], "recursive");
    for key in ["h0", "g0", "h1", "g1"] {
        assert_eq!(v[key].as_array().unwrap().len(), 10, "{key}");
    }
    assert!(v["diagnostics"]["pr_defect"].as_f64().unwrap() < 1e-12);
    let doc = FilterBankDocument::parse(&text).unwrap();
    assert_eq!(doc.to_json(), text);
    let h0_sum: f64 = doc.h0.iter().sum();
    assert!((h0_sum - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn design_to_stdout_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = bin(&["design", "--L", "3", "--M", "2"], dir.path());
    let b = bin(&["design", "--L", "3", "--M", "2"], dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn every_method_designs() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["recursive", "linear", "exact"] {
        let o = bin(&["design", "--L", "2", "--M", "2", "--method", method], dir.path());
        assert!(o.status.success(), "{method}");
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["method"], method);
    }
}

#[test]
fn verify_accepts_designed_banks() {
    let dir = tempfile::tempdir().unwrap();
    for phase in ["mid", "min"] {
        let path = design_file(dir.path(), "3", "4", phase);
        let o = bin(&["verify", path.to_str().unwrap()], dir.path());
        let text = String::from_utf8_lossy(&o.stdout);
        assert!(o.status.success(), "{text}");
        assert_eq!(text.lines().count(), 4);
        assert!(!text.contains("FAIL"));
    }
}

#[test]
fn verify_rejects_a_broken_bank() {
    let dir = tempfile::tempdir().unwrap();
    let path = design_file(dir.path(), "2", "2", "mid");
    let mut doc = FilterBankDocument::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
    doc.g0[2] += 1e-3;
    std::fs::write(&path, doc.to_json()).unwrap();
    let o = bin(&["verify", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("perfect_reconstruction") && text.contains("FAIL"));
}

#[test]
fn verify_against_reference() {
    let dir = tempfile::tempdir().unwrap();
    let path = design_file(dir.path(), "2", "2", "mid");
    let doc = FilterBankDocument::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();

    // negated and delayed copy still matches after canonicalization
    let mut h0: Vec<f64> = vec![0.0, 0.0];
    h0.extend(doc.h0.iter().map(|c| -c));
    let reference = dir.path().join("ref.json");
    std::fs::write(&reference, serde_json::json!({ "h0": h0, "g0": doc.g0 }).to_string()).unwrap();
    let args = ["verify", path.to_str().unwrap(), "--reference", reference.to_str().unwrap()];
    let o = bin(&args, dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));

    let mut wrong = doc.h0.clone();
    wrong[0] += 1e-6;
    std::fs::write(&reference, serde_json::json!({ "h0": wrong }).to_string()).unwrap();
    assert_eq!(bin(&args, dir.path()).status.code(), Some(1));

    std::fs::remove_file(&reference).unwrap();
    let o = bin(&args, dir.path());
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("skipped"));
}

#[test]
fn analyze_writes_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = design_file(dir.path(), "2", "2", "mid");
    let csv = dir.path().join("spectra.csv");
    let o = bin(
        &["analyze", path.to_str().unwrap(), "--grid-n", "1025", "--csv", csv.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["bound_violations"], 0);
    assert_eq!(v["grid_n"], 1025);
    let e1 = v["E1"].as_f64().unwrap();
    assert!(e1 > 0.0 && e1 < 1.0);
    assert!(v["hilbert_slope"].as_f64().is_some());
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().filter(|l| !l.starts_with('#')).count(), 1026);
}

#[test]
fn analyze_reports_underflow_as_null() {
    let dir = tempfile::tempdir().unwrap();
    let path = design_file(dir.path(), "8", "8", "mid");
    let o = bin(&["analyze", path.to_str().unwrap(), "--grid-n", "513"], dir.path());
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["hilbert_slope"].is_null() || v["hilbert_slope"].as_f64().unwrap() > 16.8);
}

#[test]
fn errors_are_structured() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["design", "--L", "0", "--M", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "InvalidOrder");

    let o = bin(&["design", "--L", "2", "--M", "0"], dir.path());
    assert_eq!(stderr_json(&o)["error"], "InvalidOrder");

    let o = bin(&["design", "--L", "7", "--M", "7", "--method", "linear"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "IllConditioned");

    let o = bin(&["design", "--L", "8", "--M", "8", "--method", "exact"], dir.path());
    assert_eq!(stderr_json(&o)["error"], "CostGuard");

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"schema_version\": \"9\"}").unwrap();
    let o = bin(&["verify", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "ParseError");

    let o = bin(&["verify", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "Io");

    let path = design_file(dir.path(), "1", "1", "mid");
    let o = bin(&["analyze", path.to_str().unwrap(), "--cascade-depth", "2"], dir.path());
    assert_eq!(stderr_json(&o)["error"], "TruncationTooShallow");
}

#[test]
fn table1_layout() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["table1", "--l-max", "3", "--m-max", "2"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "M,L=1,L=2,L=3,reason");
    assert_eq!(rows.len(), 3);
    let first: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(first[0], "1");
    assert!((first[1].parse::<f64>().unwrap() - 0.60).abs() < 0.01);
}

#[test]
fn figures_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["figures", "--which", "1", "--out", "figs"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("figs/figure1.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 4098);
    let svg = std::fs::read_to_string(dir.path().join("figs/figure1.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polyline").count(), 4);
    assert!(!dir.path().join("figs/figure2.csv").exists());

    let o = bin(&["figures", "--which", "2", "--out", "figs"], dir.path());
    assert!(o.status.success());
    for m in 2..=4 {
        assert!(dir.path().join(format!("figs/figure2_M{m}.svg")).exists());
    }
    let header = std::fs::read_to_string(dir.path().join("figs/figure2.csv")).unwrap();
    let cols = header.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(cols.split(',').count(), 19);
}
