use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mdevsp::fixtures::crossing_instance;
use mdevsp::instance::save_instance;

fn mdevsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdevsp"))
        .args(args)
        .env_remove("MDEVSP_BACKEND")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_instances_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = mdevsp(&[
        "generate", "--family", "benchmark", "--trips", "6", "--depots", "2", "--stations", "1",
        "--seed", "3", "--count", "5", "--config", "3i", "--config", "2i-IP+VI+I+All", "--out",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for seed in 3..8 {
        assert!(dir.path().join(format!("benchmark-n6-k2-c1-s{seed}.json")).exists());
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["instances"].as_array().unwrap().len(), 5);
    assert_eq!(manifest["configs"].as_array().unwrap().len(), 2);

    // same seed, same bytes
    let again = tempfile::tempdir().unwrap();
    mdevsp(&["generate", "--trips", "6", "--depots", "2", "--seed", "3", "--out", s(again.path())]);
    let name = "benchmark-n6-k2-c1-s3.json";
    assert_eq!(
        fs::read(dir.path().join(name)).unwrap(),
        fs::read(again.path().join(name)).unwrap()
    );
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = s(dir.path());
    let cases: &[&[&str]] = &[
        &["generate", "--family", "realistic", "--tech", "DB", "--scenario", "battery", "--out", d],
        &["generate", "--family", "benchmark", "--tech", "BEB", "--out", d],
        &["generate", "--scenario", "cold", "--out", d],
        &["generate", "--scenario", "tropical", "--out", d],
        &["solve", "missing.json", "--model", "4i"],
        &["solve", "missing.json"],
        &["frobnicate"],
    ];
    for args in cases {
        assert_eq!(mdevsp(args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(mdevsp(&["--help"]).status.code(), Some(0));
}

#[test]
fn solve_then_validate_and_catch_a_depot_swap() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("crossing.json");
    save_instance(&crossing_instance(), &inst).unwrap();
    let sol_path = dir.path().join("sol.json");

    let out = mdevsp(&["solve", s(&inst), "--model", "2i-cc", "--out", s(&sol_path)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sol: serde_json::Value = serde_json::from_str(&fs::read_to_string(&sol_path).unwrap()).unwrap();
    assert_eq!(sol["status"], "optimal");
    assert!(sol["stats"]["cuts_added"].as_u64().unwrap() >= 1);

    let ok = mdevsp(&["validate", s(&inst), s(&sol_path)]);
    assert_eq!(ok.status.code(), Some(0));

    // send the first vehicle home to the other depot
    let mut schedules = sol["schedules"].clone();
    let stops = schedules[0]["stops"].as_array_mut().unwrap();
    let last = stops.last_mut().unwrap();
    let k = last["depot"].as_u64().unwrap();
    last["depot"] = (1 - k).into();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, serde_json::to_string(&schedules).unwrap()).unwrap();
    let out = mdevsp(&["validate", s(&inst), s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("DEPOT_MISMATCH"));
}

#[test]
fn setting_names_and_oracle_agree() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("crossing.json");
    save_instance(&crossing_instance(), &inst).unwrap();
    let oracle = mdevsp(&["oracle", s(&inst)]);
    assert_eq!(oracle.status.code(), Some(0));
    let want: serde_json::Value = serde_json::from_slice(&oracle.stdout).unwrap();
    for setting in ["3i", "2i-IP+VI+IF+One", "2i-CC+I+All"] {
        let out = mdevsp(&["solve", s(&inst), "--setting", setting, "--backend", "microlp"]);
        assert_eq!(out.status.code(), Some(0), "{setting}");
        let sol: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(sol["setting"], setting);
        assert_eq!(sol["backend"], "microlp");
        assert_eq!(sol["objective"]["n_vehicles"], want["n_vehicles"]);
        assert_eq!(sol["objective"]["n_charges"], want["n_charges"]);
        let (a, b) = (
            sol["objective"]["deadhead_energy"].as_f64().unwrap(),
            want["deadhead_energy"].as_f64().unwrap(),
        );
        assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0));
    }
}

#[test]
fn graph_output_formats() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("crossing.json");
    save_instance(&crossing_instance(), &inst).unwrap();
    let dot = mdevsp(&["graph", s(&inst), "--format", "dot"]);
    assert_eq!(dot.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&dot.stdout).starts_with("digraph"));
    let edges = mdevsp(&["graph", s(&inst), "--no-prune"]);
    assert_eq!(edges.status.code(), Some(0));
    assert!(!edges.stdout.is_empty());
}

#[test]
fn bench_runs_every_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = mdevsp(&[
        "generate", "--trips", "6", "--depots", "2", "--count", "5", "--config", "3i", "--config",
        "2i-CC+VI+I+All", "--out", s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let manifest = dir.path().join("manifest.json");
    let out = mdevsp(&["bench", "--manifest", s(&manifest), "--workers", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let mut rdr = csv::Reader::from_path(dir.path().join("results").join("results.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header[0], "instance");
    assert_eq!(header.len(), 15);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    for r in &rows {
        assert_eq!(&r[5], "optimal");
    }
    // both settings agree on the fleet size for each instance
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][0], pair[1][0]);
        assert_eq!(pair[0][8], pair[1][8]);
    }
    assert!(dir.path().join("results").join("summary.csv").exists());
}
