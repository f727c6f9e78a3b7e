//! Clustering results with stable track labels.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::dataseries::DatasetSeries;

/// A node of the clustering graph: data point `i` is `NodeId(i)`, consensus
/// node `k` is `NodeId(n_points + k)`. Consensus nodes therefore sort after
/// every data point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackKind {
    Consensus,
    DataExemplar,
}

/// Extra record kept for consensus-node tracks.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusInfo {
    /// Index of the data point whose exemplar role spawned the node.
    pub parent: usize,
    pub birth_iteration: usize,
    /// Feature vector per time step while the node is alive.
    pub features: Vec<Option<Vec<f64>>>,
}

/// A cluster identity over a contiguous interval `[birth, death)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: usize,
    pub exemplar: NodeId,
    pub kind: TrackKind,
    pub birth: usize,
    /// First step after the track ends; `None` if it survives to the last step.
    pub death: Option<usize>,
    pub consensus: Option<ConsensusInfo>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringSolution {
    pub point_ids: Vec<String>,
    pub n_steps: usize,
    /// `[t][i]`: exemplar of point `i` at `t`, `None` if inactive.
    pub exemplar_of: Vec<Vec<Option<NodeId>>>,
    /// `[t][i]`: track of point `i` at `t`, `None` if inactive.
    pub track_of: Vec<Vec<Option<usize>>>,
    pub tracks: Vec<Track>,
    pub iterations: usize,
    pub converged: bool,
}

impl ClusteringSolution {
    /// Builds tracks from per-time exemplar assignments. Each consensus node
    /// and each maximal run of steps in which a data point is an exemplar
    /// becomes one track; ids follow first appearance.
    pub fn from_assignments(
        point_ids: Vec<String>,
        exemplar_of: Vec<Vec<Option<NodeId>>>,
        consensus: &BTreeMap<NodeId, ConsensusInfo>,
        iterations: usize,
        converged: bool,
    ) -> Self {
        let n_points = point_ids.len();
        let n_steps = exemplar_of.len();
        let mut tracks: Vec<Track> = Vec::new();
        let mut open: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut track_of = vec![vec![None; n_points]; n_steps];
        for t in 0..n_steps {
            let mut here: Vec<NodeId> = exemplar_of[t].iter().flatten().copied().collect();
            here.sort_unstable();
            here.dedup();
            let closing: Vec<NodeId> = open.keys().filter(|e| here.binary_search(e).is_err()).copied().collect();
            for e in closing {
                let id = open.remove(&e).unwrap();
                tracks[id].death = Some(t);
            }
            for &e in &here {
                if open.contains_key(&e) {
                    continue;
                }
                let info = consensus.get(&e).cloned();
                let id = tracks.len();
                tracks.push(Track {
                    id,
                    exemplar: e,
                    kind: if e.0 >= n_points { TrackKind::Consensus } else { TrackKind::DataExemplar },
                    birth: t,
                    death: None,
                    consensus: info,
                });
                open.insert(e, id);
            }
            for (i, e) in exemplar_of[t].iter().enumerate() {
                track_of[t][i] = e.map(|e| open[&e]);
            }
        }
        Self {
            point_ids,
            n_steps,
            exemplar_of,
            track_of,
            tracks,
            iterations,
            converged,
        }
    }

    pub fn n_points(&self) -> usize {
        self.point_ids.len()
    }

    /// Human-readable exemplar name: the point id for data exemplars and
    /// `consensus-<k>` for consensus nodes.
    pub fn exemplar_label(&self, node: NodeId) -> String {
        if node.0 < self.n_points() {
            self.point_ids[node.0].clone()
        } else {
            alloc::format!("consensus-{}", node.0 - self.n_points())
        }
    }

    /// Distinct exemplars used at step `t`.
    pub fn exemplars_at(&self, t: usize) -> Vec<NodeId> {
        let mut e: Vec<NodeId> = self.exemplar_of[t].iter().flatten().copied().collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Predicted cluster labels at `t` restricted to points that are active
    /// and carry a ground-truth label: `(truth, predicted)` pairs.
    pub fn labelled_pairs(&self, ds: &DatasetSeries, t: usize) -> (Vec<i64>, Vec<i64>) {
        let mut truth = Vec::new();
        let mut pred = Vec::new();
        for i in 0..self.n_points() {
            if let (Some(label), Some(track)) = (ds.label(t, i), self.track_of[t][i]) {
                truth.push(label);
                pred.push(track as i64);
            }
        }
        (truth, pred)
    }
}
