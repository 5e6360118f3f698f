use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use twofold::system::{build_normal_form, serialize_system, Aabb};
use twofold::{Field, System};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_twofold"));
    c.env_remove("TOOL_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_system(dir: &Path, name: &str, sys: &System) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serialize_system(sys)).unwrap();
    path
}

fn normal_form_file(dir: &Path, a: f64, b: f64, g: f64, d: i8) -> PathBuf {
    let sys = build_normal_form(a, b, g, d, None).unwrap();
    write_system(dir, &format!("nf_{a}_{b}_{g}_{d}.json"), &sys)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_elliptic_stable() {
    let dir = TempDir::new().unwrap();
    let f = normal_form_file(dir.path(), -2.0, -1.0, 1.0, -1);
    let out = run(&["classify", f.to_str().unwrap(), "--point", "0,0,0"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["verdict"]["verdict"], "Stable");
    assert_eq!(v["sliding_region"], "RE1");
    assert!((v["return_map"]["trace"].as_f64().unwrap() - 6.0).abs() < 1e-12);
    assert_eq!(v["tangency"], "fold-fold");
}

#[test]
fn classify_parabolic_transversality_failure() {
    let dir = TempDir::new().unwrap();
    let f = normal_form_file(dir.path(), -1.0, 1.5, -1.0, -1);
    let out = run(&["classify", f.to_str().unwrap(), "--point", "0,0,0"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(
        v["verdict"]["verdict"]["Unstable"]["TransversalityFailure"],
        "T",
        "{v}"
    );
}

#[test]
fn classify_regular_point() {
    let dir = TempDir::new().unwrap();
    let f = normal_form_file(dir.path(), -2.0, -1.0, 1.0, -1);
    let out = run(&["classify", f.to_str().unwrap(), "--point", "0.5,-0.5,0"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["tangency"], "regular-regular");
    assert!(v.get("normal_parameters").is_none());
    assert_eq!(v["sigma"]["kind"], "Crossing");
}

#[test]
fn error_classes_have_distinct_codes() {
    let dir = TempDir::new().unwrap();
    let f = normal_form_file(dir.path(), -2.0, -1.0, 1.0, -1);
    let off_sigma = run(&["classify", f.to_str().unwrap(), "--point", "0,0,0.5"]);
    assert_eq!(off_sigma.status.code(), Some(3));
    let missing = run(&["classify", "/nonexistent/system.json"]);
    assert_eq!(missing.status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&["classify", bad.to_str().unwrap()]).status.code(), Some(2));
    let bad_point = run(&["classify", f.to_str().unwrap(), "--point", "1,2"]);
    assert_eq!(bad_point.status.code(), Some(2));
    let coarse = run(&["sweep", "--gamma", "1", "--alpha", "-1:1:1", "--beta", "-1:1:3"]);
    assert_eq!(coarse.status.code(), Some(3));
}

fn csv_rows(bytes: &[u8]) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_reader(bytes);
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn sweep_smoke_and_output_file() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("grid.csv");
    let out = run(&[
        "sweep", "--gamma", "1", "--delta", "-1", "--alpha", "-3:3:2", "--beta", "-3:3:2", "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let bytes = std::fs::read(&out_path).unwrap();
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        [
            "alpha", "beta", "gamma", "delta", "subtype", "region", "claim", "posinv_case",
            "fixed_point_class", "verdict", "tau"
        ]
    );
    assert_eq!(csv_rows(&bytes).len(), 4);
}

#[test]
fn elliptic_atlas_cells() {
    let out = run(&["sweep", "--gamma", "1", "--alpha", "-3:3:200", "--beta", "-3:3:200"]);
    assert!(out.status.success());
    let rows = csv_rows(&out.stdout);
    assert_eq!(rows.len(), 40_000);
    let mut cases = std::collections::BTreeSet::new();
    let mut complex = 0;
    for r in &rows {
        let (a, b): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        let q = a * b * (a * b - 1.0);
        match &r[8] {
            "saddle" => {
                assert!(q > 0.0, "{a} {b}");
                cases.insert(r[7].to_string());
            }
            "complex" => {
                assert!(q < 0.0 && (0.0..1.0).contains(&(a * b)));
                assert!(!r[10].is_empty());
                complex += 1;
            }
            other => panic!("unexpected class {other} at {a} {b}"),
        }
    }
    assert_eq!(cases.len(), 4);
    assert!(complex > 0);
}

#[test]
fn hyperbolic_atlas_two_cells() {
    let out = run(&["sweep", "--gamma", "-1", "--delta", "1", "--alpha", "-3:3:50", "--beta", "-3:3:50"]);
    assert!(out.status.success());
    for r in csv_rows(&out.stdout) {
        let (a, b): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        let inside = a * b < -1.0 && a > 0.0 && b < 0.0;
        assert_eq!(&r[5], if inside { "RH1" } else { "RH2" });
        assert_eq!(&r[9], "stable");
    }
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let args = ["sweep", "--gamma", "0.7", "--alpha", "-2:2:40", "--beta", "-2:2:40"];
    let one = bin().args(args).env("TOOL_THREADS", "1").output().unwrap();
    let four = bin().args(args).env("TOOL_THREADS", "4").output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn simulate_constant_fields() {
    let dir = TempDir::new().unwrap();
    let sys = System::new(
        "constant",
        Field::constant(1.0, 0.0, -1.0),
        Field::constant(0.0, 1.0, 1.0),
        Aabb::cube(2.0),
    )
    .unwrap();
    let f = write_system(dir.path(), "c.json", &sys);
    let out = run(&["simulate", f.to_str().unwrap(), "--p0", "0,0,0.5", "--T", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&out.stdout);
    let sliding: Vec<_> = rows.iter().filter(|r| &r[1] == "sliding").collect();
    assert!(!sliding.is_empty());
    for r in &sliding {
        let (x, y, z): (f64, f64, f64) = (r[3].parse().unwrap(), r[4].parse().unwrap(), r[5].parse().unwrap());
        assert_eq!(z, 0.0);
        assert!((x - 0.5 - y).abs() < 1e-10);
    }
    let last = rows.last().unwrap();
    assert_eq!(&last[6], "time-out");
    assert!((last[3].parse::<f64>().unwrap() - 0.75).abs() < 1e-10);
}

#[test]
fn verify_normal_form_passes() {
    let out = run(&["verify", "--params", "-1,-1,0.5,-1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let results = v.as_array().unwrap();
    assert!(results.iter().any(|r| r["property"] == "diabolo" && r["status"] == "pass"));
    assert!(results.iter().all(|r| r["status"] != "fail"));
}

#[test]
fn verify_corrupted_system_fails() {
    let dir = TempDir::new().unwrap();
    let good = build_normal_form(-1.0, -1.0, 0.5, -1, None).unwrap();
    let corrupted = System::new(
        "corrupted",
        good.x_field().clone(),
        good.y_field().scale(-1.0),
        *good.domain_box(),
    )
    .unwrap()
    .with_declared(good.declared().unwrap());
    let f = write_system(dir.path(), "corrupted.json", &corrupted);
    let out = run(&["verify", f.to_str().unwrap(), "--suite", "involutions"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let rt = v.as_array().unwrap().iter().find(|r| r["property"] == "normal-parameter-round-trip").unwrap();
    assert_eq!(rt["status"], "fail");
}

#[test]
fn verify_empty_selection_is_vacuous() {
    let out = run(&["verify", "--suite", "none"]);
    assert!(out.status.success());
    assert_eq!(json(&out), Value::Array(Vec::new()));
}
