//! Tabular exports: per-step assignments and metrics, long-format plot data
//! and the cross-algorithm comparison table.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use crate::config::Algorithm;
use crate::error::{CliError, Result};
use crate::result::ResultDoc;

fn cell(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}

/// `t, point_id, exemplar, track`, one row per active point and step.
pub fn write_assignments<W: Write>(doc: &ResultDoc, w: W, path: &Path) -> Result<()> {
    let mut w = writer(w);
    w.write_record(["t", "point_id", "exemplar", "track"]).map_err(CliError::csv(path))?;
    for step in &doc.steps {
        for (point, a) in &step.assignments {
            let t = step.t.to_string();
            let track = a.track.to_string();
            w.write_record([t.as_str(), point, &a.exemplar, &track]).map_err(CliError::csv(path))?;
        }
    }
    w.flush().map_err(CliError::io(path))
}

/// `t, active, clusters, rand, modified_rand, membership_change`; the last
/// column compares `t` with `t + 1` and is empty at the final step.
pub fn write_metrics<W: Write>(doc: &ResultDoc, w: W, path: &Path) -> Result<()> {
    let m = &doc.metrics;
    let mut w = writer(w);
    w.write_record(["t", "active", "clusters", "rand", "modified_rand", "membership_change"])
        .map_err(CliError::csv(path))?;
    for (k, step) in doc.steps.iter().enumerate() {
        w.write_record([
            step.t.to_string(),
            step.assignments.len().to_string(),
            m.clusters_per_t[k].to_string(),
            cell(m.rand_per_t[k]),
            cell(m.modified_rand_per_t[k]),
            cell(m.membership_change_rate_per_t.get(k).copied()),
        ])
        .map_err(CliError::csv(path))?;
    }
    w.flush().map_err(CliError::io(path))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub t: usize,
    pub algorithm: String,
    pub rand: f64,
}

/// Per-step Rand index of each algorithm, averaged over the documents of
/// that algorithm. Documents without labels are skipped; each skip yields
/// a warning. All documents must describe one dataset.
pub fn plot_rows(docs: &[ResultDoc]) -> Result<(Vec<PlotRow>, Vec<String>)> {
    let names: BTreeSet<&str> = docs.iter().map(|d| d.dataset.name.as_str()).collect();
    if names.len() > 1 {
        return Err(CliError::Compare(format!(
            "plot data needs a single dataset, got {}",
            names.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    let mut warnings = Vec::new();
    let mut sums: BTreeMap<(Algorithm, usize), (f64, usize)> = BTreeMap::new();
    for doc in docs {
        if !doc.dataset.labelled {
            warnings.push(format!("{} on {}: no truth labels, skipped", doc.config.algorithm, doc.dataset.name));
            continue;
        }
        let algo = doc.algorithm()?;
        for (k, r) in doc.metrics.rand_per_t.iter().enumerate() {
            if let Some(r) = r {
                let e = sums.entry((algo, k + 1)).or_default();
                e.0 += r;
                e.1 += 1;
            }
        }
    }
    let rows = sums
        .into_iter()
        .map(|((algo, t), (sum, n))| PlotRow { t, algorithm: algo.name().into(), rand: sum / n as f64 })
        .collect();
    Ok((rows, warnings))
}

/// Long format `t, algorithm, rand`, one algorithm after another.
pub fn write_plot_data<W: Write>(rows: &[PlotRow], w: W, path: &Path) -> Result<()> {
    let mut w = writer(w);
    w.write_record(["t", "algorithm", "rand"]).map_err(CliError::csv(path))?;
    for r in rows {
        w.write_record([r.t.to_string(), r.algorithm.clone(), r.rand.to_string()]).map_err(CliError::csv(path))?;
    }
    w.flush().map_err(CliError::io(path))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub mean_rand: Option<f64>,
    pub mean_modified_rand: Option<f64>,
    pub mean_distinct_exemplars: f64,
    pub mean_clusters: f64,
}

fn average(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// One row per `(dataset, algorithm)`, averaging over runs (seeds).
///
/// Refused when the runs are not comparable: two runs claiming the same
/// dataset and seed but holding different data, the same
/// `(algorithm, dataset, seed)` twice, or algorithms evaluated on different
/// seed sets of one dataset.
pub fn compare(docs: &[ResultDoc]) -> Result<Vec<CompareRow>> {
    if docs.is_empty() {
        return Err(CliError::Compare("no results given".into()));
    }
    let mut fingerprints: BTreeMap<(&str, Option<u64>), &str> = BTreeMap::new();
    let mut groups: BTreeMap<(&str, Algorithm), Vec<&ResultDoc>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    let mut order: Vec<&str> = Vec::new();
    for doc in docs {
        let name = doc.dataset.name.as_str();
        let seed = doc.config.source.seed();
        let algo = doc.algorithm()?;
        let fp = *fingerprints.entry((name, seed)).or_insert(&doc.dataset.fingerprint);
        if fp != doc.dataset.fingerprint {
            return Err(CliError::Compare(format!(
                "runs on `{name}`{} hold different data",
                seed.map_or(String::new(), |s| format!(" with seed {s}"))
            )));
        }
        if !seen.insert((name, algo, seed)) {
            return Err(CliError::Compare(format!("{algo} on `{name}` appears twice for the same seed")));
        }
        if !order.contains(&name) {
            order.push(name);
        }
        groups.entry((name, algo)).or_default().push(doc);
    }
    for &name in &order {
        let seed_sets: BTreeSet<Vec<Option<u64>>> = groups
            .iter()
            .filter(|((n, _), _)| *n == name)
            .map(|(_, g)| {
                let mut seeds: Vec<_> = g.iter().map(|d| d.config.source.seed()).collect();
                seeds.sort_unstable();
                seeds
            })
            .collect();
        if seed_sets.len() > 1 {
            return Err(CliError::Compare(format!("algorithms on `{name}` were run on different seeds")));
        }
    }
    let mut rows = Vec::new();
    for &name in &order {
        for algo in Algorithm::ALL {
            let Some(g) = groups.get(&(name, algo)) else { continue };
            let n = g.len() as f64;
            rows.push(CompareRow {
                dataset: name.to_string(),
                algorithm: algo,
                runs: g.len(),
                mean_rand: average(g.iter().map(|d| d.metrics.mean_rand)),
                mean_modified_rand: average(g.iter().map(|d| d.metrics.mean_modified_rand)),
                mean_distinct_exemplars: g.iter().map(|d| d.metrics.distinct_exemplars as f64).sum::<f64>() / n,
                mean_clusters: g.iter().map(|d| d.metrics.mean_clusters).sum::<f64>() / n,
            });
        }
    }
    Ok(rows)
}

pub fn write_compare<W: Write>(rows: &[CompareRow], w: W, path: &Path) -> Result<()> {
    let mut w = writer(w);
    w.write_record([
        "dataset",
        "algorithm",
        "runs",
        "mean_rand",
        "mean_modified_rand",
        "distinct_exemplars",
        "mean_clusters",
    ])
    .map_err(CliError::csv(path))?;
    let fixed = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.4}"));
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.algorithm.name().into(),
            r.runs.to_string(),
            fixed(r.mean_rand),
            fixed(r.mean_modified_rand),
            format!("{:.2}", r.mean_distinct_exemplars),
            format!("{:.2}", r.mean_clusters),
        ])
        .map_err(CliError::csv(path))?;
    }
    w.flush().map_err(CliError::io(path))
}
