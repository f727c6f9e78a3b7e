use std::path::Path;

use eap::config::Algorithm;
use eap::{execute, read_csv, validate, write_csv, CliError, ColumnMapping, DatasetSource, ResultDoc, RunConfig};
use eap_core::synthgen::ScenarioKind;
use eap_core::DatasetSeries;
use proptest::prelude::*;
use serde_json::Value;

fn round_trip(ds: &DatasetSeries) -> DatasetSeries {
    let mut buf = Vec::new();
    write_csv(ds, &mut buf, Path::new("mem")).unwrap();
    read_csv(buf.as_slice(), Path::new("mem"), &ColumnMapping::default()).unwrap()
}

fn dataset() -> impl Strategy<Value = DatasetSeries> {
    (1usize..6, 1usize..5, 1usize..4).prop_flat_map(|(n, steps, dim)| {
        let cell = (any::<bool>(), prop::collection::vec(-1e6f64..1e6, dim), prop::option::of(-3i64..3));
        prop::collection::vec(prop::collection::vec(cell, n), steps).prop_filter_map("valid dataset", move |grid| {
            let ids = (0..n).map(|i| format!("pt{i}")).collect();
            // All points are active at step 0, so first-appearance order is
            // index order; point 0 is active throughout, so the CSV keeps T.
            let features = grid
                .iter()
                .enumerate()
                .map(|(t, row)| row.iter().enumerate().map(|(i, (on, x, _))| (t == 0 || i == 0 || *on).then(|| x.clone())).collect())
                .collect::<Vec<Vec<Option<Vec<f64>>>>>();
            let labels = grid
                .iter()
                .zip(&features)
                .map(|(row, f)| row.iter().zip(f).map(|((_, _, l), x)| x.as_ref().and(*l)).collect())
                .collect();
            DatasetSeries::new(ids, features, Some(labels)).ok()
        })
    })
}

proptest! {
    #[test]
    fn csv_round_trip(ds in dataset()) {
        prop_assert_eq!(round_trip(&ds), ds);
    }
}

#[test]
fn synthetic_round_trip() {
    let ds = eap_core::synthgen::gen_third_cluster(3);
    assert_eq!(round_trip(&ds), ds);
}

#[test]
fn short_row_is_a_schema_error() {
    let text = "point_id,t,a,b,c\np,1,1,2,3\nq,1,1,2,\np,2,1,2,3\nq,2,1,2,4\n";
    // An empty cell is a missing value, not a shorter row.
    let ds = read_csv(text.as_bytes(), Path::new("mem"), &ColumnMapping::default()).unwrap();
    assert!(ds.is_imputed(0, 1));
    assert_eq!(ds.features(0, 1), Some(&[1.0, 2.0, 4.0][..]));
    let text = "point_id,t,a,b,c\np,1,1,2,3\nq,1,1,2\n";
    let err = read_csv(text.as_bytes(), Path::new("mem"), &ColumnMapping::default()).unwrap_err();
    assert!(matches!(err, CliError::CsvField { .. }), "{err}");
}

#[test]
fn duplicate_observation_is_refused() {
    let text = "point_id,t,x\np,1,1\np,1,2\n";
    let err = read_csv(text.as_bytes(), Path::new("mem"), &ColumnMapping::default()).unwrap_err();
    assert!(matches!(err, CliError::Core(eap_core::Error::Duplicate { .. })), "{err}");
}

fn small_doc(algorithm: Algorithm, seed: u64) -> ResultDoc {
    let source = DatasetSource::Synthetic {
        kind: ScenarioKind::ThirdCluster,
        seed,
        n_points: Some(18),
        n_steps: Some(14),
    };
    execute(&RunConfig::new(algorithm, source), 1_700_000_000 + seed).unwrap().doc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn results_round_trip_through_the_validator(seed in 0u64..1000, algo in 0usize..3) {
        let doc = small_doc(Algorithm::ALL[algo], seed);
        let back = ResultDoc::from_json(&doc.to_json(), "mem").unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.to_json(), doc.to_json());
    }
}

fn mutate(doc: &ResultDoc, f: impl FnOnce(&mut Value)) -> Result<ResultDoc, CliError> {
    let mut v = serde_json::to_value(doc).unwrap();
    f(&mut v);
    validate(&v)
}

#[test]
fn validator_catches_structural_damage() {
    let doc = small_doc(Algorithm::Eap, 5);
    assert!(validate(&serde_json::to_value(&doc).unwrap()).is_ok());
    let bad = [
        mutate(&doc, |v| v["schema_version"] = 2.into()),
        mutate(&doc, |v| v["extra"] = 1.into()),
        mutate(&doc, |v| {
            v.as_object_mut().unwrap().remove("tracks");
        }),
        mutate(&doc, |v| v["steps"][0]["t"] = 7.into()),
        mutate(&doc, |v| {
            let first = v["steps"][0]["assignments"].as_object_mut().unwrap().values_mut().next().unwrap();
            first["track"] = 999.into();
        }),
        mutate(&doc, |v| v["metrics"]["rand_per_t"][0] = 1.5.into()),
        mutate(&doc, |v| v["created_unix"] = "now".into()),
    ];
    for (k, r) in bad.iter().enumerate() {
        assert!(matches!(r, Err(CliError::Schema(_))), "mutation {k} accepted");
    }
    // The timestamp is outside the hash.
    assert!(mutate(&doc, |v| v["created_unix"] = 1.into()).is_ok());
}

#[test]
fn assignments_stay_inside_track_intervals() {
    for algo in Algorithm::ALL {
        let doc = small_doc(algo, 9);
        for step in &doc.steps {
            for a in step.assignments.values() {
                let tr = &doc.tracks[a.track];
                assert!(tr.birth_t <= step.t && tr.death_t.is_none_or(|d| step.t < d));
            }
        }
    }
}
