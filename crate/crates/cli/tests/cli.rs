use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use relent_cli::state_file::StateFile;
use relent_core::{is_ppt, werner_reference_entanglement, DensityMatrix, WernerParameter};
use serde_json::Value;
use tempfile::TempDir;

fn relent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path_str(&path)]);
    let out = relent(&full);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn load_state(path: &Path) -> DensityMatrix {
    StateFile::parse(&std::fs::read_to_string(path).unwrap())
        .unwrap()
        .to_state(1e-8)
        .unwrap()
}

fn ree_report(input: &Path, extra: &[&str]) -> (Value, i32) {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("report.json");
    let mut args = vec!["ree", path_str(input), "--out", path_str(&report)];
    args.extend_from_slice(extra);
    let out = relent(&args);
    (read_json(&report), out.status.code().unwrap())
}

#[test]
fn singlet_report() {
    let dir = TempDir::new().unwrap();
    let input = gen(&dir, "singlet.json", &["werner", "--d", "2", "--f", "-1"]);
    let (rep, code) = ree_report(&input, &["--bits"]);
    assert_eq!(code, 0);
    assert!((rep["entanglement_nats"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-8);
    assert!((rep["entanglement"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(rep["unit"], "bits");
    assert_eq!(rep["verdict"], "entangled");
    assert_eq!(rep["converged"], true);
    assert!(rep["witness_expectation"].as_f64().unwrap() < -0.99);
    let digest = relent_cli::report::sha256_hex(&std::fs::read(&input).unwrap());
    assert_eq!(rep["input_sha256"], digest.as_str());
}

#[test]
fn generated_werner_at_f_minus_one_is_the_singlet() {
    let dir = TempDir::new().unwrap();
    let input = gen(&dir, "w.json", &["werner", "--d", "2", "--f", "-1"]);
    let diff = load_state(&input).matrix() - DensityMatrix::singlet().matrix();
    assert!(diff.max_abs() < 1e-12);
}

#[test]
fn maximally_mixed_is_separable() {
    let dir = TempDir::new().unwrap();
    let input = gen(
        &dir,
        "mixed.json",
        &["werner", "--d", "3", "--f", "0.3333333333333333"],
    );
    let (rep, code) = ree_report(&input, &[]);
    assert_eq!(code, 0);
    assert_eq!(rep["verdict"], "separable");
    assert!(rep["entanglement_nats"].as_f64().unwrap() < 1e-7);
}

#[test]
fn werner_d4_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let input = gen(&dir, "w4.json", &["werner", "--d", "4", "--f", "-0.8"]);
    let (rep, code) = ree_report(&input, &["--restarts", "1"]);
    assert_eq!(code, 0);
    let reference = werner_reference_entanglement(WernerParameter::new(4, -0.8).unwrap());
    assert!((rep["entanglement_nats"].as_f64().unwrap() - reference).abs() < 1e-4);
}

#[test]
fn gen_is_deterministic_and_seed_sensitive() {
    let dir = TempDir::new().unwrap();
    for kind in ["separable", "npt", "pure-random"] {
        let a = gen(&dir, "a.json", &[kind, "--dims", "2", "3", "--seed", "7"]);
        let a = std::fs::read(a).unwrap();
        let b = gen(&dir, "b.json", &[kind, "--dims", "2", "3", "--seed", "7"]);
        let b = std::fs::read(b).unwrap();
        let c = gen(&dir, "c.json", &[kind, "--dims", "2", "3", "--seed", "8"]);
        let c = std::fs::read(c).unwrap();
        assert_eq!(a, b, "{kind}");
        assert_ne!(a, c, "{kind}");
    }
}

#[test]
fn generated_npt_fails_ppt_and_separable_passes() {
    let dir = TempDir::new().unwrap();
    for seed in ["1", "2", "3"] {
        let npt = gen(&dir, "n.json", &["npt", "--dims", "2", "2", "--seed", seed]);
        assert!(!is_ppt(&load_state(&npt), 0.0).unwrap());
        let sep = gen(
            &dir,
            "s.json",
            &["separable", "--dims", "2", "2", "--seed", seed],
        );
        assert!(is_ppt(&load_state(&sep), 1e-12).unwrap());
    }
}

#[test]
fn state_file_round_trip_through_disk() {
    let dir = TempDir::new().unwrap();
    let input = gen(&dir, "n.json", &["npt", "--dims", "3", "2", "--seed", "5"]);
    let state = load_state(&input);
    let again = dir.path().join("again.json");
    std::fs::write(&again, StateFile::from_state(&state).to_json()).unwrap();
    let diff = load_state(&again).matrix() - state.matrix();
    assert!(diff.max_abs() <= 1e-15);
}

#[test]
fn witness_on_singlet() {
    let dir = TempDir::new().unwrap();
    let input = gen(&dir, "singlet.json", &["werner", "--d", "2", "--f", "-1"]);
    let report = dir.path().join("w.json");
    let matrix = dir.path().join("wm.json");
    let out = relent(&[
        "witness",
        path_str(&input),
        "--samples",
        "300",
        "--out",
        path_str(&report),
        "--witness-out",
        path_str(&matrix),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rep = read_json(&report);
    assert!((rep["expectation_input"].as_f64().unwrap() + 1.0).abs() < 1e-6);
    assert!(rep["expectation_closest"].as_f64().unwrap().abs() < 1e-6);
    assert_eq!(rep["certifying"], true);
    assert_eq!(rep["separable_passed"], true);
    assert!(rep["product_min"].as_f64().unwrap() > -1e-6);
    let w = StateFile::parse(&std::fs::read_to_string(&matrix).unwrap())
        .unwrap()
        .to_matrix()
        .unwrap();
    assert!(w.is_hermitian(1e-10));
}

#[test]
fn witness_on_separable_input_warns() {
    let dir = TempDir::new().unwrap();
    let input = gen(&dir, "s.json", &["werner", "--d", "2", "--f", "0.5"]);
    let report = dir.path().join("w.json");
    let out = relent(&[
        "witness",
        path_str(&input),
        "--samples",
        "50",
        "--out",
        path_str(&report),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("separable"));
    assert_eq!(read_json(&report)["certifying"], false);
}

#[test]
fn figure_csv_is_sorted_and_gains_precision() {
    let dir = TempDir::new().unwrap();
    let csv_path = dir.path().join("fig3.csv");
    let out = relent(&[
        "figure",
        "fig3",
        "--restarts",
        "1",
        "--out",
        path_str(&csv_path),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["series_label", "iteration", "S_nats", "precision_digits"]
    );
    let rows: Vec<(String, usize, f64, f64)> =
        reader.deserialize().collect::<Result<_, _>>().unwrap();
    let mut labels: Vec<&str> = rows.iter().map(|r| r.0.as_str()).collect();
    labels.dedup();
    assert_eq!(labels.len(), 6);
    assert!(labels.windows(2).all(|w| w[0] < w[1]));
    for label in labels {
        let series: Vec<_> = rows.iter().filter(|r| r.0 == label).collect();
        assert!(series.windows(2).all(|w| w[1].1 == w[0].1 + 1));
        assert!(series.windows(2).all(|w| w[1].2 <= w[0].2 + 1e-12));
        assert!(series.last().unwrap().3 >= 6.0, "{label}");
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(relent(&["ree", path_str(&missing)]).status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dims": [2, 2], "matrix": [[[1, 0]]]}"#).unwrap();
    assert_eq!(relent(&["ree", path_str(&bad)]).status.code(), Some(2));

    let input = gen(&dir, "s.json", &["werner", "--d", "2", "--f", "-1"]);
    assert_eq!(
        relent(&["ree", path_str(&input), "--alpha", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        relent(&["ree", path_str(&input), "--restarts", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(relent(&["gen", "npt"]).status.code(), Some(2));
    assert_eq!(
        relent(&["gen", "werner", "--d", "2", "--f", "2"])
            .status
            .code(),
        Some(2)
    );

    let (rep, code) = ree_report(&input, &["--max-iter", "2"]);
    assert_eq!(code, 3);
    assert_eq!(rep["termination"], "max_iterations");
    assert_eq!(rep["converged"], false);
}
