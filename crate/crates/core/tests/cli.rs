use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bottleneck_lab::channels::stinespring_extend;
use bottleneck_lab::cli::output::{digest, manifest_path, read_csv, CurveRow, RegionRow, RunManifest};
use bottleneck_lab::curve::{Curve, CurveKind};
use bottleneck_lab::quantum::{mutual_information, purify, rho3};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bottleneck-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], threads: &str) -> Output {
    bin().args(args).env("BOTTLENECK_LAB_THREADS", threads).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn quantum_ib_example_writes_21_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = run(&["ib", "--state", "rho3:p=0.4", "--quantum", "--dw", "3", "--grid", "21", "--normalize", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<CurveRow> = read_csv(&out).unwrap();
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r.value >= -1e-12 && r.value <= 1.0 + 1e-9));
    assert!(manifest_path(&out).exists());
}

#[test]
fn classical_bsc_matches_reference_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bsc.csv");
    let o = run(&["ib", "--state", "bsc:delta=0.1", "--classical", "--grid", "21", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0);
    let rows: Vec<CurveRow> = read_csv(&out).unwrap();
    assert_eq!(rows.len(), 21);
    let gap = rows.iter().map(|r| (r.value - r.reference.unwrap()).abs()).fold(0.0, f64::max);
    assert!(gap <= 2e-3, "sup gap {gap}");
}

#[test]
fn verify_all_passes() {
    let o = run(&["verify", "--suite", "all", "--seed", "7"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{text}");
    assert!(text.lines().count() >= 10);
    assert!(!text.contains("FAIL"));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["ib", "--state", "rho3:p=1.5"])), 2);
    assert_eq!(code(&run(&["ib", "--state", "nonsense:x=1"])), 2);
    assert_eq!(code(&run(&["ib", "--state", "rho3:p=0.4", "--grid", "3", "--restarts", "1", "--out", "/nonexistent/dir/c.csv"])), 2);
    assert_eq!(code(&run(&["ib", "--state", "bsc:delta=0.1", "--classical", "--dw", "1", "--grid", "3"])), 3);
    assert_eq!(code(&run(&["ib", "--state", "rho3:p=0.4", "--no-such-flag"])), 64);
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run_env(&["state", "--state", "pure2q"], "zero")), 64);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn outputs_are_deterministic_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &PathBuf| {
        vec![
            "pf".to_string(),
            "--state".into(),
            "rho3:p=0.4".into(),
            "--grid".into(),
            "6".into(),
            "--restarts".into(),
            "3".into(),
            "--beta-grid".into(),
            "log:0.5:20:6".into(),
            "--format".into(),
            "json".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let mut bytes = Vec::new();
    for (k, threads) in ["1", "1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("pf{k}.json"));
        let a = args(&out);
        let o = run_env(&a.iter().map(String::as_str).collect::<Vec<_>>(), threads);
        assert_eq!(code(&o), 0);
        bytes.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    assert_eq!(bytes[0], bytes[2]);
}

#[test]
fn manifest_records_digests_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (out, plot) = (dir.path().join("c.csv"), dir.path().join("c.svg"));
    let o = run(&["ib", "--state", "bsc:delta=0.2", "--classical", "--grid", "5", "--seed", "11", "--out", path_str(&out), "--plot", path_str(&plot)]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(manifest_path(&out)).unwrap();
    let m: RunManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(m.seed, 11);
    assert_eq!(m.outputs.len(), 2);
    assert_eq!(m.outputs[0].sha256, digest(&std::fs::read(&out).unwrap()));
    assert_eq!(m.outputs[1].sha256, digest(&std::fs::read(&plot).unwrap()));
    assert_eq!(serde_json::from_str::<RunManifest>(&serde_json::to_string(&m).unwrap()).unwrap(), m);
    let svg = std::fs::read_to_string(&plot).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("R(a)") && svg.contains("reference"));
}

#[test]
fn csv_matches_json_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, json) = (dir.path().join("c.csv"), dir.path().join("c.json"));
    for (p, f) in [(&csv, "csv"), (&json, "json")] {
        let o = run(&["pf", "--state", "bsc:delta=0.15", "--classical", "--grid", "9", "--format", f, "--out", path_str(p)]);
        assert_eq!(code(&o), 0);
    }
    let rows: Vec<CurveRow> = read_csv(&csv).unwrap();
    let curve: Curve = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(rows.len(), curve.points.len());
    for (r, p) in rows.iter().zip(&curve.points) {
        assert_eq!(r.abscissa.to_bits(), p.abscissa.to_bits());
        assert_eq!(r.value.to_bits(), p.value.to_bits());
        assert_eq!(r.achieved_constraint.to_bits(), p.achieved_constraint.to_bits());
        assert_eq!(r.reference.map(f64::to_bits), p.reference.map(f64::to_bits));
    }
}

#[test]
fn json_witnesses_replay_to_reported_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ib.json");
    let o = run(&["ib", "--state", "rho3:p=0.4", "--grid", "7", "--restarts", "4", "--beta-grid", "log:0.3:30:10", "--format", "json", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0);
    let curve: Curve = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(curve.kind, CurveKind::Ib);
    let psi = purify(&rho3(0.4).unwrap(), "R").unwrap();
    for p in &curve.points {
        let iso = p.witness.as_ref().unwrap().to_isometry().unwrap();
        let sigma = stinespring_extend(&iso, &psi, "X").unwrap();
        let compression = mutual_information(&sigma, &["Y", "R"], &["W"]).unwrap();
        let relevant = mutual_information(&sigma, &["Y"], &["W"]).unwrap();
        assert!((compression - p.value).abs() <= 1e-9, "{} vs {}", compression, p.value);
        assert!((relevant - p.achieved_constraint).abs() <= 1e-9);
        assert!(relevant >= p.abscissa - 1e-9);
    }
}

#[test]
fn region_export_has_increasing_q_x() {
    let dir = tempfile::tempdir().unwrap();
    let (out, plot) = (dir.path().join("r.csv"), dir.path().join("r.svg"));
    let o = run(&["rate-region", "--state", "rho3:p=0.4", "--grid", "6", "--restarts", "3", "--out", path_str(&out), "--plot", path_str(&plot)]);
    assert_eq!(code(&o), 0);
    let rows: Vec<RegionRow> = read_csv(&out).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.windows(2).all(|w| w[1].q_x > w[0].q_x && w[1].q_y <= w[0].q_y + 1e-9));
    assert!(std::fs::read_to_string(&plot).unwrap().contains("Q_X"));
}

#[test]
fn state_file_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("state.json");
    let o = run(&["state", "--state", "random:seed=4,dx=2,dy=3", "--out", path_str(&file)]);
    assert_eq!(code(&o), 0);
    let first = String::from_utf8_lossy(&o.stdout).into_owned();
    let o = run(&["state", "--state", path_str(&file)]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout), first);
    let raw: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(raw["matrix"][0][0].as_array().unwrap().len(), 2);
}

#[test]
fn dimension_study_writes_one_block_per_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = run(&["dim-study", "--state", "rho3:p=0.4", "--dw-list", "2,3", "--grid", "4", "--restarts", "2", "--beta-grid", "log:0.5:10:5", "--normalize", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("d_w,abscissa,value,achieved_constraint,converged\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 4);
    assert_eq!(code(&run(&["dim-study", "--state", "rho3:p=0.4", "--dw-list", "3,2"])), 2);
}
