//! The versioned result document written by `run`.
//!
//! Time steps are 1-based in every serialized field. A track covers the
//! steps `birth_t..death_t`; `death_t` is the first step without it, or
//! null if it lasts to the end. `created_unix` is the only field that may
//! differ between identical runs, and it is left out of
//! `determinism_hash` together with the hash itself.

use std::collections::BTreeMap;

use eap_core::metrics::{modified_rand, rand_index, track_stats};
use eap_core::{ClusteringSolution, DatasetSeries, TrackKind};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{preference_name, Algorithm, DatasetSource, RunConfig};
use crate::csv_io::write_csv;
use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDoc {
    pub schema_version: u32,
    pub created_unix: u64,
    pub determinism_hash: String,
    pub config: ConfigEcho,
    pub dataset: DatasetInfo,
    pub iterations: usize,
    pub converged: bool,
    pub tracks: Vec<TrackRecord>,
    pub steps: Vec<StepRecord>,
    pub metrics: MetricsBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub algorithm: String,
    pub source: SourceEcho,
    pub gamma: f64,
    pub omega: f64,
    pub lambda: f64,
    pub max_iter: usize,
    pub conv_window: usize,
    pub min_cluster_size: usize,
    pub preference: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceEcho {
    Csv { path: String, normalized: bool },
    Synthetic { scenario: String, seed: u64, n_points: usize, n_steps: usize },
}

impl SourceEcho {
    /// Seed of a synthetic dataset; `None` for files.
    pub fn seed(&self) -> Option<u64> {
        match self {
            SourceEcho::Synthetic { seed, .. } => Some(*seed),
            SourceEcho::Csv { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetInfo {
    /// Scenario name or file path; rows of a comparison are keyed by it.
    pub name: String,
    pub n_points: usize,
    pub n_steps: usize,
    pub dim: usize,
    pub labelled: bool,
    /// SHA-256 of the clustered dataset in CSV form.
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackRecord {
    pub id: usize,
    pub exemplar: String,
    pub kind: String,
    pub birth_t: usize,
    pub death_t: Option<usize>,
    /// Data point whose exemplar role spawned a consensus track.
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    pub t: usize,
    /// Active points only, keyed by point id.
    pub assignments: BTreeMap<String, Assignment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assignment {
    pub exemplar: String,
    pub track: usize,
}

/// Per-step metrics are null where undefined: no labels, fewer than two
/// labelled points, or a zero denominator of the modified Rand index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsBlock {
    pub rand_per_t: Vec<Option<f64>>,
    pub modified_rand_per_t: Vec<Option<f64>>,
    pub mean_rand: Option<f64>,
    pub mean_modified_rand: Option<f64>,
    pub clusters_per_t: Vec<usize>,
    pub mean_clusters: f64,
    pub distinct_exemplars: usize,
    pub n_tracks: usize,
    /// Entry `t` compares steps `t` and `t + 1`.
    pub membership_change_rate_per_t: Vec<f64>,
    pub births_t: Vec<usize>,
    pub deaths_t: Vec<usize>,
    /// Distinct exemplars with the mean cluster count, e.g. `2 (2.00)`.
    pub summary: String,
}

fn mean(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

pub fn dataset_fingerprint(ds: &DatasetSeries) -> String {
    let mut buf = Vec::new();
    write_csv(ds, &mut buf, std::path::Path::new("<fingerprint>")).expect("writing to memory");
    hex::encode(Sha256::digest(&buf))
}

pub fn metrics_block(ds: &DatasetSeries, sol: &ClusteringSolution) -> MetricsBlock {
    let per_t: Vec<(Option<f64>, Option<f64>)> = (0..sol.n_steps)
        .map(|t| {
            let (truth, pred) = sol.labelled_pairs(ds, t);
            (rand_index(&truth, &pred).ok(), modified_rand(&truth, &pred).ok())
        })
        .collect();
    let rand_per_t: Vec<_> = per_t.iter().map(|p| p.0).collect();
    let modified_rand_per_t: Vec<_> = per_t.iter().map(|p| p.1).collect();
    let stats = track_stats(sol);
    MetricsBlock {
        mean_rand: mean(&rand_per_t),
        mean_modified_rand: mean(&modified_rand_per_t),
        rand_per_t,
        modified_rand_per_t,
        mean_clusters: stats.mean_clusters(),
        summary: stats.summary(),
        clusters_per_t: stats.clusters_per_t,
        distinct_exemplars: stats.distinct_exemplars_total,
        n_tracks: stats.n_tracks,
        membership_change_rate_per_t: stats.membership_change_rate_per_t,
        births_t: stats.births.iter().map(|t| t + 1).collect(),
        deaths_t: stats.deaths.iter().map(|t| t + 1).collect(),
    }
}

fn config_echo(cfg: &RunConfig, ds: &DatasetSeries) -> ConfigEcho {
    let engine = cfg.engine();
    let source = match &cfg.source {
        DatasetSource::Csv { path, normalize, .. } => {
            SourceEcho::Csv { path: path.display().to_string(), normalized: *normalize }
        }
        DatasetSource::Synthetic { kind, seed, .. } => SourceEcho::Synthetic {
            scenario: kind.name().into(),
            seed: *seed,
            n_points: ds.n_points(),
            n_steps: ds.n_steps(),
        },
    };
    let (gamma, omega, min_cluster_size) = match cfg.algorithm {
        Algorithm::Ap => (0.0, 0.0, 1),
        _ => (engine.gamma, engine.omega, engine.min_cluster_size),
    };
    ConfigEcho {
        algorithm: cfg.algorithm.name().into(),
        source,
        gamma,
        omega,
        lambda: engine.lambda,
        max_iter: engine.max_iter,
        conv_window: engine.conv_window,
        min_cluster_size,
        preference: preference_name(cfg.preference),
    }
}

impl ResultDoc {
    pub fn build(cfg: &RunConfig, ds: &DatasetSeries, sol: &ClusteringSolution, created_unix: u64) -> Self {
        let tracks = sol
            .tracks
            .iter()
            .map(|tr| TrackRecord {
                id: tr.id,
                exemplar: sol.exemplar_label(tr.exemplar),
                kind: match tr.kind {
                    TrackKind::Consensus => "consensus",
                    TrackKind::DataExemplar => "data-exemplar",
                }
                .into(),
                birth_t: tr.birth + 1,
                death_t: tr.death.map(|d| d + 1),
                parent: tr.consensus.as_ref().map(|c| sol.point_ids[c.parent].clone()),
            })
            .collect();
        let steps = (0..sol.n_steps)
            .map(|t| StepRecord {
                t: t + 1,
                assignments: (0..sol.n_points())
                    .filter_map(|i| {
                        let e = sol.exemplar_of[t][i]?;
                        let track = sol.track_of[t][i]?;
                        Some((sol.point_ids[i].clone(), Assignment { exemplar: sol.exemplar_label(e), track }))
                    })
                    .collect(),
            })
            .collect();
        let name = match &cfg.source {
            DatasetSource::Csv { path, .. } => path.display().to_string(),
            DatasetSource::Synthetic { kind, .. } => kind.name().into(),
        };
        let mut doc = ResultDoc {
            schema_version: SCHEMA_VERSION,
            created_unix,
            determinism_hash: String::new(),
            config: config_echo(cfg, ds),
            dataset: DatasetInfo {
                name,
                n_points: ds.n_points(),
                n_steps: ds.n_steps(),
                dim: ds.dim(),
                labelled: ds.has_labels(),
                fingerprint: dataset_fingerprint(ds),
            },
            iterations: sol.iterations,
            converged: sol.converged,
            tracks,
            steps,
            metrics: metrics_block(ds, sol),
        };
        doc.determinism_hash = doc.compute_hash();
        doc
    }

    /// SHA-256 of the compact JSON without the timestamp and the hash.
    pub fn compute_hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("result documents serialize");
        let map = value.as_object_mut().expect("document is an object");
        map.remove("created_unix");
        map.remove("determinism_hash");
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result documents serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(CliError::json(origin))?;
        validate(&value)
    }

    pub fn algorithm(&self) -> Result<Algorithm> {
        self.config.algorithm.parse()
    }
}

/// Checks a parsed result document against the schema: exact field set and
/// types, version, 1-based contiguous steps, track intervals, assignments
/// that reference live tracks with matching exemplars, metric ranges and the
/// determinism hash. Returns the typed document on success.
pub fn validate(value: &Value) -> Result<ResultDoc> {
    let doc: ResultDoc = serde_json::from_value(value.clone()).map_err(|e| CliError::Schema(vec![e.to_string()]))?;
    let mut errors = Vec::new();
    let n_steps = doc.dataset.n_steps;
    if doc.schema_version != SCHEMA_VERSION {
        errors.push(format!("schema_version {} is not {SCHEMA_VERSION}", doc.schema_version));
    }
    if doc.config.algorithm.parse::<Algorithm>().is_err() {
        errors.push(format!("unknown algorithm `{}`", doc.config.algorithm));
    }
    if doc.steps.len() != n_steps {
        errors.push(format!("{} steps recorded for {n_steps} time steps", doc.steps.len()));
    }
    for (k, step) in doc.steps.iter().enumerate() {
        if step.t != k + 1 {
            errors.push(format!("step {} is labelled t={}", k + 1, step.t));
        }
    }
    let mut covered = vec![Vec::new(); doc.tracks.len()];
    for (k, tr) in doc.tracks.iter().enumerate() {
        if tr.id != k {
            errors.push(format!("track at position {k} has id {}", tr.id));
        }
        if !matches!(tr.kind.as_str(), "consensus" | "data-exemplar") {
            errors.push(format!("track {k} has unknown kind `{}`", tr.kind));
        }
        let end = tr.death_t.unwrap_or(n_steps + 1);
        if tr.birth_t < 1 || end <= tr.birth_t || end > n_steps + 1 || tr.death_t == Some(n_steps + 1) {
            errors.push(format!("track {k} has an invalid interval {}..{:?}", tr.birth_t, tr.death_t));
        }
        if (tr.kind == "consensus") != tr.parent.is_some() {
            errors.push(format!("track {k} has a parent iff it is a consensus track"));
        }
        covered[k] = vec![false; n_steps + 2];
    }
    for step in &doc.steps {
        for (point, a) in &step.assignments {
            let Some(tr) = doc.tracks.get(a.track) else {
                errors.push(format!("t={}: `{point}` references missing track {}", step.t, a.track));
                continue;
            };
            if step.t < tr.birth_t || tr.death_t.is_some_and(|d| step.t >= d) {
                errors.push(format!("t={}: `{point}` is assigned to track {} outside its interval", step.t, a.track));
            }
            if a.exemplar != tr.exemplar {
                errors.push(format!("t={}: `{point}` has exemplar `{}` but track {} is `{}`", step.t, a.exemplar, a.track, tr.exemplar));
            }
            if let Some(c) = covered[a.track].get_mut(step.t) {
                *c = true;
            }
        }
    }
    for (k, tr) in doc.tracks.iter().enumerate() {
        let end = tr.death_t.unwrap_or(n_steps + 1).min(n_steps + 1);
        if (tr.birth_t.max(1)..end).any(|t| !covered[k][t]) {
            errors.push(format!("track {k} is not used at every step of its interval"));
        }
    }
    let m = &doc.metrics;
    let unit = |v: &f64| (0.0..=1.0).contains(v);
    if m.rand_per_t.len() != n_steps || m.modified_rand_per_t.len() != n_steps || m.clusters_per_t.len() != n_steps {
        errors.push("per-step metrics do not cover every step".into());
    }
    if m.membership_change_rate_per_t.len() != n_steps.saturating_sub(1) {
        errors.push("membership change rates do not cover every pair of steps".into());
    }
    let in_range = m.rand_per_t.iter().chain(&m.modified_rand_per_t).chain([&m.mean_rand, &m.mean_modified_rand]).flatten().all(unit)
        && m.membership_change_rate_per_t.iter().all(unit);
    if !in_range {
        errors.push("a metric lies outside [0, 1]".into());
    }
    if m.n_tracks != doc.tracks.len() {
        errors.push(format!("metrics count {} tracks, document has {}", m.n_tracks, doc.tracks.len()));
    }
    if doc.determinism_hash != doc.compute_hash() {
        errors.push("determinism_hash does not match the document".into());
    }
    if errors.is_empty() {
        Ok(doc)
    } else {
        Err(CliError::Schema(errors))
    }
}
