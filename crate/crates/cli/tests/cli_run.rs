//! Drives the `eap` binary end to end.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use eap::ResultDoc;

fn eap(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_eap"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn read_doc(dir: &Path) -> ResultDoc {
    eap::runner::read_result(&dir.join("result.json")).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn eap_tracks_two_separated_clusters() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let args = ["run", "--algo", "eap", "--synthetic", "separated", "--seed", "7", "--gamma", "2", "--omega", "1", "--lambda", "0.9"];
    let out = eap(&[&args[..], &["--out", out_dir.to_str().unwrap()]].concat(), &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read_doc(&out_dir);
    assert_eq!(doc.tracks.len(), 2);
    assert!(doc.tracks.iter().all(|t| t.kind == "consensus"));
    assert_eq!(doc.metrics.distinct_exemplars, 2);
    assert!(out_dir.join("assignments.csv").exists() && out_dir.join("metrics.csv").exists());
}

#[test]
fn ap_baseline_uses_many_exemplars() {
    let dir = tempfile::tempdir().unwrap();
    let out = eap(&["run", "--algo", "ap", "--synthetic", "separated", "--seed", "7", "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(code(&out), 0);
    let doc = read_doc(dir.path());
    assert!(doc.metrics.distinct_exemplars > 20, "{}", doc.metrics.distinct_exemplars);
    assert!(doc.tracks.iter().all(|t| t.kind == "data-exemplar"));
}

#[test]
fn omega_above_gamma_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = eap(&["run", "--synthetic", "colliding", "--gamma", "1", "--omega", "2", "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("omega"));
    assert!(!dir.path().join("result.json").exists());
}

#[test]
fn environment_overrides_flags_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = eap(
        &["run", "--synthetic", "colliding", "--out", dir.path().to_str().unwrap()],
        &[("EAP_OMEGA", "5"), ("EAP_N_POINTS", "10")],
    );
    assert_eq!(code(&out), 1);
    let out = eap(
        &["run", "--synthetic", "colliding", "--omega", "0.5", "--out", dir.path().to_str().unwrap()],
        &[("EAP_OMEGA", "5"), ("EAP_N_POINTS", "10"), ("EAP_STEPS", "4")],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read_doc(dir.path());
    assert_eq!(doc.config.omega, 0.5);
    assert_eq!((doc.dataset.n_points, doc.dataset.n_steps), (10, 4));
}

#[test]
fn iteration_cap_exits_two_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "--synthetic", "third-cluster", "--n-points", "30", "--max-iter", "30", "--conv-window", "100"];
    let out = eap(&[&args[..], &["--out", dir.path().to_str().unwrap()]].concat(), &[]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read_doc(dir.path());
    assert!(!doc.converged);
    assert_eq!(doc.iterations, 30);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&eap(&["run"], &[])), 1);
    assert_eq!(code(&eap(&["run", "--synthetic", "gaussians"], &[])), 1);
    assert_eq!(code(&eap(&["run", "--synthetic", "separated", "--csv", "x.csv"], &[])), 1);
    assert_eq!(code(&eap(&["--help"], &[])), 0);
}

#[test]
fn same_config_gives_identical_json_apart_from_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = eap(&["run", "--synthetic", "cluster-change", "--seed", "3", "--n-points", "24", "--out", out_dir.to_str().unwrap()], &[]);
        assert_eq!(code(&out), 0);
        let text = fs::read_to_string(out_dir.join("result.json")).unwrap();
        let doc = read_doc(&out_dir);
        (text, doc)
    };
    let (a, doc_a) = run("a");
    let (b, doc_b) = run("b");
    assert_eq!(doc_a.determinism_hash, doc_b.determinism_hash);
    let strip = |s: &str| s.lines().filter(|l| !l.contains("\"created_unix\"")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&a), strip(&b));
}

/// Rand index by direct enumeration of point pairs.
fn rand_by_pairs(truth: &[i64], pred: &[String]) -> f64 {
    let n = truth.len();
    let mut agree = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            agree += usize::from((truth[i] == truth[j]) == (pred[i] == pred[j]));
        }
    }
    agree as f64 / (n * (n - 1) / 2) as f64
}

#[test]
fn plot_data_matches_recomputed_rand() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let out = eap(&["generate", "--synthetic", "colliding", "--seed", "2", "--n-points", "30", "--out", data.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 0);
    let run_dir = dir.path().join("run");
    let out = eap(&["run", "--csv", data.to_str().unwrap(), "--emit-plot-data", "--out", run_dir.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let mut truth: BTreeMap<(usize, String), i64> = BTreeMap::new();
    for row in csv_rows(&data) {
        truth.insert((row[1].parse().unwrap(), row[0].clone()), row[4].parse().unwrap());
    }
    let mut by_t: BTreeMap<usize, (Vec<i64>, Vec<String>)> = BTreeMap::new();
    for row in csv_rows(&run_dir.join("assignments.csv")) {
        let t: usize = row[0].parse().unwrap();
        let e = by_t.entry(t).or_default();
        e.0.push(truth[&(t, row[1].clone())]);
        e.1.push(row[3].clone());
    }
    let plot = csv_rows(&run_dir.join("plot.csv"));
    assert_eq!(plot.len(), 25);
    for row in plot {
        let t: usize = row[0].parse().unwrap();
        assert_eq!(row[1], "eap");
        let rand: f64 = row[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&rand));
        let (tr, pr) = &by_t[&t];
        assert!((rand - rand_by_pairs(tr, pr)).abs() < 1e-12, "t={t}");
    }
}

#[test]
fn unlabelled_plot_data_is_skipped_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let mut text = String::from("point_id,t,x,y\n");
    for t in 1..=3 {
        for (i, x) in [0.0, 0.1, 0.2, 5.0, 5.1, 5.2].iter().enumerate() {
            text.push_str(&format!("p{i},{t},{x},{}\n", t as f64 * 0.01));
        }
    }
    fs::write(&data, text).unwrap();
    let out = eap(&["run", "--csv", data.to_str().unwrap(), "--emit-plot-data", "--out", dir.path().to_str().unwrap()], &[]);
    assert!(matches!(code(&out), 0 | 2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no truth labels"));
    assert!(!dir.path().join("plot.csv").exists());
    assert!(read_doc(dir.path()).metrics.rand_per_t.iter().all(Option::is_none));
}

#[test]
fn validate_rejects_tampered_results() {
    let dir = tempfile::tempdir().unwrap();
    let out = eap(&["run", "--synthetic", "separated", "--n-points", "16", "--steps", "5", "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(code(&out), 0);
    let path = dir.path().join("result.json");
    assert_eq!(code(&eap(&["validate", path.to_str().unwrap()], &[])), 0);
    let text = fs::read_to_string(&path).unwrap().replace("\"converged\": true", "\"converged\": false");
    fs::write(&path, text).unwrap();
    let out = eap(&["validate", path.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("determinism_hash"));
}
