//! Clustering evaluation: pair-counting indices and track statistics.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::solution::{ClusteringSolution, NodeId};

/// Pair counts derived from the contingency table of two labelings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PairCounts {
    total: u64,
    same_both: u64,
    same_truth: u64,
    same_pred: u64,
}

impl PairCounts {
    fn diff_both(&self) -> u64 {
        self.total + self.same_both - self.same_truth - self.same_pred
    }
}

fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

fn pair_counts(truth: &[i64], pred: &[i64]) -> PairCounts {
    assert_eq!(truth.len(), pred.len(), "labelings cover different point sets");
    let mut joint: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    let mut by_truth: BTreeMap<i64, u64> = BTreeMap::new();
    let mut by_pred: BTreeMap<i64, u64> = BTreeMap::new();
    for (&a, &b) in truth.iter().zip(pred) {
        *joint.entry((a, b)).or_default() += 1;
        *by_truth.entry(a).or_default() += 1;
        *by_pred.entry(b).or_default() += 1;
    }
    PairCounts {
        total: pairs(truth.len() as u64),
        same_both: joint.values().map(|&c| pairs(c)).sum(),
        same_truth: by_truth.values().map(|&c| pairs(c)).sum(),
        same_pred: by_pred.values().map(|&c| pairs(c)).sum(),
    }
}

/// Fraction of point pairs on which the two labelings agree (both same or
/// both different cluster). Panics if the slices differ in length.
pub fn rand_index(truth: &[i64], pred: &[i64]) -> Result<f64> {
    if truth.len() < 2 {
        return Err(Error::UndefinedMetric("rand index needs at least two points"));
    }
    let c = pair_counts(truth, pred);
    Ok((c.same_both + c.diff_both()) as f64 / c.total as f64)
}

/// Half the precision of predicted same-cluster pairs plus half the precision
/// of predicted different-cluster pairs.
pub fn modified_rand(truth: &[i64], pred: &[i64]) -> Result<f64> {
    if truth.len() < 2 {
        return Err(Error::UndefinedMetric("modified rand index needs at least two points"));
    }
    let c = pair_counts(truth, pred);
    if c.same_pred == 0 {
        return Err(Error::UndefinedMetric("no predicted same-cluster pair"));
    }
    let diff_pred = c.total - c.same_pred;
    if diff_pred == 0 {
        return Err(Error::UndefinedMetric("no predicted different-cluster pair"));
    }
    Ok(c.same_both as f64 / (2 * c.same_pred) as f64 + c.diff_both() as f64 / (2 * diff_pred) as f64)
}

/// Per-time and whole-run cluster statistics of a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackStats {
    /// Distinct exemplars (tracks) used at each step.
    pub clusters_per_t: Vec<usize>,
    /// Distinct exemplar nodes used anywhere in the run.
    pub distinct_exemplars_total: usize,
    pub n_tracks: usize,
    /// Entry `t` is the fraction of points active at `t` and `t+1` whose track
    /// differs between the two steps.
    pub membership_change_rate_per_t: Vec<f64>,
    /// Birth step of each track, in track order.
    pub births: Vec<usize>,
    /// Death step (first step after the track) of each ended track.
    pub deaths: Vec<usize>,
}

impl TrackStats {
    pub fn mean_clusters(&self) -> f64 {
        if self.clusters_per_t.is_empty() {
            return 0.0;
        }
        self.clusters_per_t.iter().sum::<usize>() as f64 / self.clusters_per_t.len() as f64
    }

    /// `"<distinct> (<mean clusters>)"`, e.g. `"3 (2.64)"`.
    pub fn summary(&self) -> String {
        alloc::format!("{} ({:.2})", self.distinct_exemplars_total, self.mean_clusters())
    }
}

pub fn track_stats(solution: &ClusteringSolution) -> TrackStats {
    let clusters_per_t = (0..solution.n_steps).map(|t| solution.exemplars_at(t).len()).collect();
    let distinct: BTreeSet<NodeId> = solution.exemplar_of.iter().flatten().flatten().copied().collect();
    let membership_change_rate_per_t = (0..solution.n_steps.saturating_sub(1))
        .map(|t| {
            let both: Vec<(usize, usize)> = solution.track_of[t]
                .iter()
                .zip(&solution.track_of[t + 1])
                .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                .collect();
            if both.is_empty() {
                0.0
            } else {
                both.iter().filter(|(a, b)| a != b).count() as f64 / both.len() as f64
            }
        })
        .collect();
    TrackStats {
        clusters_per_t,
        distinct_exemplars_total: distinct.len(),
        n_tracks: solution.tracks.len(),
        membership_change_rate_per_t,
        births: solution.tracks.iter().map(|tr| tr.birth).collect(),
        deaths: solution.tracks.iter().filter_map(|tr| tr.death).collect(),
    }
}
