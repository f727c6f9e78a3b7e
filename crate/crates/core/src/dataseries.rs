//! Temporal datasets: ingestion, imputation, normalization and feature
//! transforms.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub use crate::similarity::PreferenceMode;

/// One row of raw input: a point observed at a (0-based) time step.
///
/// A `None` feature is a missing cell; it is imputed from the same point's
/// previous observed value, or its first observed value if there is none.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub point_id: String,
    pub t: usize,
    pub features: Vec<Option<f64>>,
    pub label: Option<i64>,
}

/// Feature vectors, activity and optional ground truth for `N` named points
/// over `T` time steps.
///
/// Invariants: a feature vector exists at `(t, i)` iff the point is active
/// there, all vectors share one dimension, and every point is active at
/// least once.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSeries {
    point_ids: Vec<String>,
    n_steps: usize,
    dim: usize,
    features: Vec<Vec<Option<Vec<f64>>>>,
    labels: Vec<Vec<Option<i64>>>,
    imputed: Vec<Vec<bool>>,
}

impl DatasetSeries {
    /// Builds a dataset from dense per-time tables (`[t][i]`).
    pub fn new(
        point_ids: Vec<String>,
        features: Vec<Vec<Option<Vec<f64>>>>,
        labels: Option<Vec<Vec<Option<i64>>>>,
    ) -> Result<Self> {
        let n = point_ids.len();
        let n_steps = features.len();
        if n == 0 || n_steps == 0 {
            return Err(Error::EmptyDataset);
        }
        let labels = labels.unwrap_or_else(|| vec![vec![None; n]; n_steps]);
        if labels.len() != n_steps {
            return Err(Error::Schema("label table has wrong number of time steps".into()));
        }
        let mut dim = None;
        let mut seen = vec![false; n];
        for (t, row) in features.iter().enumerate() {
            if row.len() != n || labels[t].len() != n {
                return Err(Error::Schema(alloc::format!(
                    "time step {t} does not cover all {n} points"
                )));
            }
            for (i, x) in row.iter().enumerate() {
                let Some(x) = x else {
                    if labels[t][i].is_some() {
                        return Err(Error::Schema(alloc::format!(
                            "point `{}` is labelled at t={t} but inactive",
                            point_ids[i]
                        )));
                    }
                    continue;
                };
                seen[i] = true;
                match dim {
                    None if x.is_empty() => {
                        return Err(Error::Schema("feature dimension must be at least 1".into()))
                    }
                    None => dim = Some(x.len()),
                    Some(d) if d != x.len() => {
                        return Err(Error::Schema(alloc::format!(
                            "point `{}` at t={t} has {} features, expected {d}",
                            point_ids[i],
                            x.len()
                        )))
                    }
                    _ => {}
                }
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Schema(alloc::format!(
                        "non-finite feature for point `{}` at t={t}",
                        point_ids[i]
                    )));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Schema(alloc::format!(
                "point `{}` is never active",
                point_ids[i]
            )));
        }
        let imputed = vec![vec![false; n]; n_steps];
        Ok(Self {
            point_ids,
            n_steps,
            dim: dim.ok_or(Error::EmptyDataset)?,
            features,
            labels,
            imputed,
        })
    }

    /// Builds a dataset from observation rows. Points are ordered by first
    /// appearance, `T` is one past the largest time index, and `(id, t)`
    /// pairs without a row are inactive.
    pub fn from_observations<I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = Observation>,
    {
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut point_ids = Vec::new();
        let mut cells: BTreeMap<(usize, usize), (Vec<Option<f64>>, Option<i64>)> = BTreeMap::new();
        let mut dim = None;
        let mut n_steps = 0;
        for row in rows {
            match dim {
                None if row.features.is_empty() => {
                    return Err(Error::Schema("feature dimension must be at least 1".into()))
                }
                None => dim = Some(row.features.len()),
                Some(d) if d != row.features.len() => {
                    return Err(Error::Schema(alloc::format!(
                        "row for `{}` at t={} has {} features, expected {d}",
                        row.point_id,
                        row.t,
                        row.features.len()
                    )))
                }
                _ => {}
            }
            let i = *index.entry(row.point_id.clone()).or_insert_with(|| {
                point_ids.push(row.point_id.clone());
                point_ids.len() - 1
            });
            if cells.contains_key(&(i, row.t)) {
                return Err(Error::Duplicate {
                    point: row.point_id,
                    t: row.t,
                });
            }
            n_steps = n_steps.max(row.t + 1);
            cells.insert((i, row.t), (row.features, row.label));
        }
        let Some(dim) = dim else {
            return Err(Error::EmptyDataset);
        };
        let n = point_ids.len();
        let mut features = vec![vec![None; n]; n_steps];
        let mut labels = vec![vec![None; n]; n_steps];
        let mut imputed = vec![vec![false; n]; n_steps];
        for i in 0..n {
            let times: Vec<usize> = cells.range((i, 0)..(i + 1, 0)).map(|(&(_, t), _)| t).collect();
            for d in 0..dim {
                let first_known = times.iter().find_map(|t| cells[&(i, *t)].0[d]);
                let Some(first_known) = first_known else {
                    return Err(Error::Schema(alloc::format!(
                        "feature {d} of point `{}` is never observed",
                        point_ids[i]
                    )));
                };
                let mut last = None;
                for &t in &times {
                    let observed = cells[&(i, t)].0[d];
                    let value = match observed {
                        Some(v) => {
                            last = Some(v);
                            v
                        }
                        None => {
                            imputed[t][i] = true;
                            last.unwrap_or(first_known)
                        }
                    };
                    features[t][i]
                        .get_or_insert_with(|| Vec::with_capacity(dim))
                        .push(value);
                }
            }
            for &t in &times {
                labels[t][i] = cells[&(i, t)].1;
            }
        }
        let mut ds = Self::new(point_ids, features, Some(labels))?;
        ds.imputed = imputed;
        Ok(ds)
    }

    /// Inverse of [`DatasetSeries::from_observations`]: one row per active
    /// `(point, t)`, time-major.
    pub fn to_observations(&self) -> Vec<Observation> {
        let mut out = Vec::new();
        for t in 0..self.n_steps {
            for i in 0..self.n_points() {
                if let Some(x) = &self.features[t][i] {
                    out.push(Observation {
                        point_id: self.point_ids[i].clone(),
                        t,
                        features: x.iter().map(|v| Some(*v)).collect(),
                        label: self.labels[t][i],
                    });
                }
            }
        }
        out
    }

    pub fn n_points(&self) -> usize {
        self.point_ids.len()
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point_ids(&self) -> &[String] {
        &self.point_ids
    }

    pub fn is_active(&self, t: usize, i: usize) -> bool {
        self.features[t][i].is_some()
    }

    pub fn features(&self, t: usize, i: usize) -> Option<&[f64]> {
        self.features[t][i].as_deref()
    }

    pub fn label(&self, t: usize, i: usize) -> Option<i64> {
        self.labels[t][i]
    }

    pub fn has_labels(&self) -> bool {
        self.labels.iter().flatten().any(Option::is_some)
    }

    /// True if any feature of point `i` at `t` was imputed.
    pub fn is_imputed(&self, t: usize, i: usize) -> bool {
        self.imputed[t][i]
    }

    pub fn active_points(&self, t: usize) -> Vec<usize> {
        (0..self.n_points()).filter(|&i| self.is_active(t, i)).collect()
    }

    pub fn fully_active(&self) -> bool {
        self.features.iter().flatten().all(Option::is_some)
    }

    fn map_features(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let mut out = self.clone();
        for row in out.features.iter_mut() {
            for x in row.iter_mut().flatten() {
                *x = f(x);
            }
        }
        out
    }
}

/// Per-feature standardisation over every active `(t, i)` entry, using the
/// population standard deviation.
pub fn normalize_global(ds: &DatasetSeries) -> Result<DatasetSeries> {
    let dim = ds.dim;
    let mut count = 0usize;
    let mut mean = vec![0.0; dim];
    for x in ds.features.iter().flatten().flatten() {
        count += 1;
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= count as f64);
    let mut var = vec![0.0; dim];
    for x in ds.features.iter().flatten().flatten() {
        for d in 0..dim {
            let c = x[d] - mean[d];
            var[d] += c * c;
        }
    }
    let mut std = Vec::with_capacity(dim);
    for (d, v) in var.iter().enumerate() {
        let s = libm::sqrt(v / count as f64);
        if !(s > f64::EPSILON * (1.0 + libm::fabs(mean[d]))) {
            return Err(Error::DegenerateFeature { dim: d });
        }
        std.push(s);
    }
    Ok(ds.map_features(|x| {
        x.iter()
            .enumerate()
            .map(|(d, v)| (v - mean[d]) / std[d])
            .collect()
    }))
}

/// Converts raw series into piecewise normalized derivatives.
///
/// The raw time axis is cut into consecutive windows of `window` steps (a
/// trailing partial window is dropped). For each window, a point present at
/// every step of the window gets the consecutive differences of each feature,
/// standardised to zero mean and unit population standard deviation, and
/// concatenated across features. Output time step `w` is window `w`.
pub fn piecewise_normalized_derivative(ds: &DatasetSeries, window: usize) -> Result<DatasetSeries> {
    let n_windows = ds.n_steps / window.max(1);
    if window < 3 || n_windows == 0 {
        return Err(Error::InsufficientData {
            point: ds.point_ids.first().cloned().unwrap_or_default(),
            window: 0,
        });
    }
    let n = ds.n_points();
    let mut features = vec![vec![None; n]; n_windows];
    let mut labels = vec![vec![None; n]; n_windows];
    for w in 0..n_windows {
        let steps = w * window..(w + 1) * window;
        for i in 0..n {
            let present = steps.clone().filter(|&t| ds.is_active(t, i)).count();
            if present == 0 {
                continue;
            }
            if present < window {
                return Err(Error::InsufficientData {
                    point: ds.point_ids[i].clone(),
                    window: w,
                });
            }
            let mut out = Vec::with_capacity(ds.dim * (window - 1));
            for d in 0..ds.dim {
                let diffs: Vec<f64> = steps
                    .clone()
                    .zip(steps.clone().skip(1))
                    .map(|(a, b)| ds.features(b, i).unwrap()[d] - ds.features(a, i).unwrap()[d])
                    .collect();
                let normalized = standardize(&diffs).ok_or_else(|| Error::InsufficientData {
                    point: ds.point_ids[i].clone(),
                    window: w,
                })?;
                out.extend(normalized);
            }
            features[w][i] = Some(out);
            labels[w][i] = ds.label(steps.end - 1, i);
        }
    }
    let active: Vec<bool> = (0..n).map(|i| features.iter().any(|row| row[i].is_some())).collect();
    let point_ids = ds
        .point_ids
        .iter()
        .zip(&active)
        .filter(|(_, a)| **a)
        .map(|(p, _)| p.to_string())
        .collect();
    DatasetSeries::new(
        point_ids,
        features.into_iter().map(|row| keep_active(row, &active)).collect(),
        Some(labels.into_iter().map(|row| keep_active(row, &active)).collect()),
    )
}

fn keep_active<T>(row: Vec<T>, active: &[bool]) -> Vec<T> {
    row.into_iter().zip(active).filter(|(_, a)| **a).map(|(x, _)| x).collect()
}

fn standardize(xs: &[f64]) -> Option<Vec<f64>> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = libm::sqrt(var);
    if !(std > f64::EPSILON * (1.0 + libm::fabs(mean))) {
        return None;
    }
    Some(xs.iter().map(|x| (x - mean) / std).collect())
}
