use eap::config::Algorithm;
use eap::report::{compare, plot_rows, write_compare};
use eap::{execute, CliError, DatasetSource, ResultDoc, RunConfig};
use eap_core::synthgen::ScenarioKind;

fn doc(algorithm: Algorithm, kind: ScenarioKind, seed: u64, n_points: usize) -> ResultDoc {
    let source = DatasetSource::Synthetic { kind, seed, n_points: Some(n_points), n_steps: None };
    execute(&RunConfig::new(algorithm, source), 0).unwrap().doc
}

fn table(rows: &[eap::report::CompareRow]) -> String {
    let mut buf = Vec::new();
    write_compare(rows, &mut buf, std::path::Path::new("mem")).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn four_datasets_by_three_algorithms() {
    let docs: Vec<ResultDoc> = ScenarioKind::ALL
        .into_iter()
        .flat_map(|kind| Algorithm::ALL.map(|a| (a, kind)))
        .map(|(a, kind)| doc(a, kind, 1, 24))
        .collect();
    let rows = compare(&docs).unwrap();
    assert_eq!(rows.len(), 12);
    let text = table(&rows);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "dataset,algorithm,runs,mean_rand,mean_modified_rand,distinct_exemplars,mean_clusters");
    let keys: Vec<(String, String)> = lines[1..]
        .iter()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    let expected: Vec<(String, String)> = ScenarioKind::ALL
        .into_iter()
        .flat_map(|k| ["eap", "ap", "eap-nocn"].map(|a| (k.name().to_string(), a.to_string())))
        .collect();
    assert_eq!(keys, expected);
    for r in &rows {
        assert_eq!(r.runs, 1);
        assert!(r.mean_rand.is_some_and(|v| (0.0..=1.0).contains(&v)));
    }
}

#[test]
fn single_row_and_rerun_equality() {
    let docs = [doc(Algorithm::Eap, ScenarioKind::Colliding, 4, 20)];
    let rows = compare(&docs).unwrap();
    assert_eq!(rows.len(), 1);
    let again = [doc(Algorithm::Eap, ScenarioKind::Colliding, 4, 20)];
    assert_eq!(table(&rows), table(&compare(&again).unwrap()));
}

#[test]
fn seeds_are_averaged() {
    let docs: Vec<ResultDoc> = (0..3).map(|s| doc(Algorithm::Ap, ScenarioKind::Separated, s, 16)).collect();
    let rows = compare(&docs).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].runs, 3);
    let mean = docs.iter().map(|d| d.metrics.distinct_exemplars as f64).sum::<f64>() / 3.0;
    assert!((rows[0].mean_distinct_exemplars - mean).abs() < 1e-12);
}

#[test]
fn mixed_datasets_are_refused() {
    // Same scenario and seed, different data.
    let a = doc(Algorithm::Eap, ScenarioKind::Colliding, 0, 20);
    let b = doc(Algorithm::Ap, ScenarioKind::Colliding, 0, 22);
    assert!(matches!(compare(&[a.clone(), b]), Err(CliError::Compare(_))));
    // Algorithms evaluated on different seeds.
    let c = doc(Algorithm::Ap, ScenarioKind::Colliding, 1, 20);
    assert!(matches!(compare(&[a.clone(), c]), Err(CliError::Compare(_))));
    // The same run twice.
    assert!(matches!(compare(&[a.clone(), a]), Err(CliError::Compare(_))));
    assert!(matches!(compare(&[]), Err(CliError::Compare(_))));
}

#[test]
fn plot_rows_average_per_algorithm() {
    let docs: Vec<ResultDoc> = [(Algorithm::Eap, 0), (Algorithm::Eap, 1), (Algorithm::Ap, 0), (Algorithm::Ap, 1)]
        .into_iter()
        .map(|(a, s)| doc(a, ScenarioKind::ClusterChange, s, 20))
        .collect();
    let (rows, warnings) = plot_rows(&docs).unwrap();
    assert!(warnings.is_empty());
    assert_eq!(rows.len(), 2 * 25);
    let eap_t3 = rows.iter().find(|r| r.algorithm == "eap" && r.t == 3).unwrap().rand;
    let expected = (docs[0].metrics.rand_per_t[2].unwrap() + docs[1].metrics.rand_per_t[2].unwrap()) / 2.0;
    assert!((eap_t3 - expected).abs() < 1e-12);
    let other = doc(Algorithm::Ap, ScenarioKind::Colliding, 0, 20);
    assert!(plot_rows(&[docs[0].clone(), other]).is_err());
}
