use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use logscan::io::{write_scan, ScanFormat};
use logscan::synthetic::{random_rigid_transform, LogShape};
use logscan::PointCloud;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logscan"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn field(stdout: &str, key: &str) -> Vec<f64> {
    let line = stdout.lines().find(|l| l.starts_with(key)).unwrap();
    line[key.len() + 1..]
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect()
}

fn log_scan(seed: u64, n: usize) -> PointCloud<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LogShape::random(&mut rng).sample(&mut rng, n).unwrap()
}

#[test]
fn register_identical_scans() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.xyz");
    write_scan(&log_scan(1, 300), &a, ScanFormat::Xyz).unwrap();
    let out = ok(&["register", s(&a), s(&a)]);
    assert_eq!(field(&out, "quaternion:"), [1.0, 0.0, 0.0, 0.0]);
    assert_eq!(field(&out, "translation:"), [0.0, 0.0, 0.0]);
    assert_eq!(field(&out, "mse:"), [0.0]);
    assert!(out.contains("terminal_reason: converged"));
}

#[test]
fn register_recovers_known_transform_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let model = log_scan(2, 500);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let truth = random_rigid_transform(&mut rng, 0.08, 20.0);
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.ply"));
    write_scan(&truth.inverse().apply(&model), &a, ScanFormat::Csv).unwrap();
    write_scan(&model, &b, ScanFormat::PlyAscii).unwrap();
    let trace = dir.path().join("trace.csv");
    let out = ok(&["register", s(&a), s(&b), "--trace", s(&trace)]);
    let q = field(&out, "quaternion:");
    let t = field(&out, "translation:");
    let got = logscan::RigidTransform::new(
        logscan::UnitQuaternion::normalize(q[0], q[1], q[2], q[3]).unwrap(),
        logscan::Vec3::new(t[0], t[1], t[2]),
    );
    assert!(got.rotation_error(&truth) < 1e-6);
    assert!(got.translation_error(&truth) < 1e-6);
    let rows: Vec<String> = fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert_eq!(rows[0], "iteration,mse");
    assert_eq!(rows.len() - 1, field(&out, "iterations:")[0] as usize);
}

#[test]
fn missing_file_exits_with_input_error() {
    let out = run(&["register", "/nonexistent/a.xyz", "/nonexistent/b.xyz"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/a.xyz"));
}

#[test]
fn invalid_flags_exit_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.xyz");
    write_scan(&log_scan(4, 50), &a, ScanFormat::Xyz).unwrap();
    for bad in [["--tau", "0"], ["--max-iters", "0"], ["--stride", "0"]] {
        let out = run(&["register", s(&a), s(&a), bad[0], bad[1]]);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
    }
    assert_eq!(run(&["register"]).status.code(), Some(2));
}

/// Writes `ids` as a manifest + basket table under `dir`.
fn write_set(dir: &Path, name: &str, logs: &[(&str, u64, [u32; 3])]) -> std::path::PathBuf {
    fs::create_dir_all(dir.join("scans")).unwrap();
    let mut manifest = String::from("id,scan_path\n");
    let mut baskets = String::from("id,oak,ash,elm\n");
    for (id, seed, b) in logs {
        write_scan(
            &log_scan(*seed, 200),
            &dir.join(format!("scans/{id}.xyz")),
            ScanFormat::Xyz,
        )
        .unwrap();
        manifest.push_str(&format!("{id},scans/{id}.xyz\n"));
        baskets.push_str(&format!("{id},{},{},{}\n", b[0], b[1], b[2]));
    }
    fs::write(dir.join(format!("{name}.csv")), manifest).unwrap();
    fs::write(dir.join(format!("{name}_baskets.csv")), baskets).unwrap();
    dir.join(format!("{name}.csv"))
}

#[test]
fn predict_and_evaluate_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let train = write_set(
        d,
        "train",
        &[
            ("t1", 10, [1, 0, 2]),
            ("t2", 11, [0, 3, 0]),
            ("t3", 12, [2, 2, 2]),
        ],
    );
    let test = write_set(d, "test", &[("q1", 11, [0, 3, 0]), ("q2", 12, [2, 2, 1])]);
    let tb = d.join("train_baskets.csv");

    let out = ok(&["predict", s(&train), s(&test), "--baskets", s(&tb)]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "id,neighbor_id,distance,oak,ash,elm");
    assert!(lines[1].starts_with("q1,t2,0,0,3,0"), "{}", lines[1]);
    assert!(lines[2].starts_with("q2,t3,0,2,2,2"), "{}", lines[2]);

    let mean = ok(&[
        "predict",
        s(&train),
        s(&test),
        "--baskets",
        s(&tb),
        "--predictor",
        "mean",
    ]);
    assert_eq!(
        mean,
        "id,neighbor_id,distance,oak,ash,elm\nq1,,,1,2,1\nq2,,,1,2,1\n"
    );

    let pred = d.join("pred.csv");
    ok(&[
        "predict",
        s(&train),
        s(&test),
        "--baskets",
        s(&tb),
        "--out",
        s(&pred),
    ]);
    let truth = d.join("test_baskets.csv");
    let report = ok(&["evaluate", s(&pred), s(&truth), "--label", "icp"]);
    // q1 exact; q2 is (2,2,1) vs (2,2,2).
    let want_pre = (1.0 + (1.0 + 1.0 + 1.0) / 3.0) / 2.0;
    let want_pro = (1.0 + (1.0 + 1.0 + 0.5) / 3.0) / 2.0;
    assert_eq!(
        report.lines().nth(1).unwrap(),
        format!(
            "icp,0.5000,{:.4},{:.4},{want_pre:.4},{want_pro:.4},{:.4},2",
            (1.0 + 2.0 / 3.0) / 2.0,
            (1.0 + 2.5 / 3.0) / 2.0,
            (1.0 + 2.5 / 3.0) / 2.0,
        )
    );

    let exact = d.join("exact.csv");
    fs::write(
        &exact,
        "id,neighbor_id,distance,oak,ash,elm\nq2,,,2,2,1\nq1,t2,0,0,3,0\n",
    )
    .unwrap();
    let json = d.join("r.json");
    ok(&[
        "evaluate",
        s(&exact),
        s(&truth),
        "--format",
        "json",
        "--out",
        s(&json),
    ]);
    let rows = logscan::io::load_report_json(&json).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].predictor, "model");
    assert_eq!(rows[0].report.values(), [1.0; 6]);
}

#[test]
fn evaluate_rejects_mismatched_ids() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("p.csv");
    let truth = dir.path().join("t.csv");
    fs::write(&pred, "id,neighbor_id,distance,p1\na,x,0,1\n").unwrap();
    fs::write(&truth, "id,p1\na,1\nb,2\nc,0\n").unwrap();
    let out = run(&["evaluate", s(&pred), s(&truth)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("b, c"), "{err}");
}

#[test]
fn no_filter_does_not_lower_ratio_scores() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("p.csv");
    let truth = dir.path().join("t.csv");
    fs::write(
        &pred,
        "id,neighbor_id,distance,p1,p2,p3,p4\na,,,2,0,0,0\nb,,,0,0,1,0\n",
    )
    .unwrap();
    fs::write(&truth, "id,p1,p2,p3,p4\na,4,0,0,0\nb,0,0,0,0\n").unwrap();
    let rows = |extra: &[&str]| {
        let mut args = vec!["evaluate", s(&pred), s(&truth)];
        args.extend_from_slice(extra);
        let out = ok(&args);
        out.lines()
            .nth(1)
            .unwrap()
            .split(',')
            .skip(1)
            .take(6)
            .map(|v| v.parse::<f64>().unwrap())
            .collect::<Vec<_>>()
    };
    let filtered = rows(&[]);
    let raw = rows(&["--no-filter"]);
    for i in [3, 4, 5] {
        assert!(raw[i] >= filtered[i], "{raw:?} vs {filtered:?}");
    }
    assert!(raw[3] > filtered[3]);
}

#[test]
fn predict_with_empty_training_manifest_fails() {
    let dir = tempfile::tempdir().unwrap();
    let test = write_set(dir.path(), "test", &[("q1", 1, [0, 1, 0])]);
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "id,scan_path\n").unwrap();
    fs::write(dir.path().join("baskets.csv"), "id,oak,ash,elm\n").unwrap();
    let out = run(&["predict", s(&empty), s(&test)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiment_emits_run_and_mean_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    ok(&[
        "synth",
        "--out-dir",
        s(&data),
        "--prototypes",
        "5",
        "--copies",
        "2",
        "--products",
        "4",
        "--min-points",
        "40",
        "--max-points",
        "60",
    ]);
    let manifest = data.join("manifest.csv");
    let out = ok(&[
        "experiment",
        s(&manifest),
        "--runs",
        "1",
        "--predictor",
        "mean",
    ]);
    let labels: Vec<&str> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(labels, ["mean/run0", "mean/mean"]);
    assert!(out.lines().nth(1).unwrap().ends_with(",4"));

    let out = ok(&[
        "experiment",
        s(&manifest),
        "--runs",
        "2",
        "--predictor",
        "icp,knn",
        "--k",
        "1",
    ]);
    let labels: Vec<&str> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(
        labels,
        ["icp/run0", "knn/run0", "icp/run1", "knn/run1", "icp/mean", "knn/mean"]
    );
    assert!(out.lines().nth(5).unwrap().ends_with(",8"));

    let bad = run(&["experiment", s(&manifest), "--predictor", "nearest"]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = run(&["experiment", s(&manifest), "--train-frac", "1.5"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn split_writes_consistent_tables() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    ok(&[
        "synth",
        "--out-dir",
        s(&data),
        "--prototypes",
        "4",
        "--copies",
        "3",
        "--products",
        "3",
        "--min-points",
        "30",
        "--max-points",
        "40",
        "--empty-prototypes",
        "1",
    ]);
    let out_dir = dir.path().join("split");
    ok(&[
        "split",
        s(&data.join("manifest.csv")),
        "--drop-empty",
        "--run",
        "2",
        "--out-dir",
        s(&out_dir),
    ]);
    let count = |f: &str| fs::read_to_string(out_dir.join(f)).unwrap().lines().count() - 1;
    assert_eq!(count("train.csv") + count("test.csv"), 9);
    assert_eq!(count("train.csv"), 5);
    assert_eq!(count("test_baskets.csv"), count("test.csv"));
    // Manifests work from their new location.
    let pred = ok(&[
        "predict",
        s(&out_dir.join("train.csv")),
        s(&out_dir.join("test.csv")),
        "--predictor",
        "mean",
    ]);
    assert_eq!(pred.lines().count() - 1, count("test.csv"));
}
