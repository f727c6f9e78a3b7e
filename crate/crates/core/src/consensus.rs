//! Consensus-node bookkeeping: births, per-step presence, deaths and the
//! adjacent-iteration revival rule.
//!
//! A consensus node is a synthetic exemplar whose feature vector is the mean
//! of its members. Its id persists across time steps, which is what makes a
//! cluster trackable.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataseries::DatasetSeries;
use crate::solution::{ConsensusInfo, NodeId};

/// State of a consensus node at one time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Presence {
    /// Never reached this step.
    Absent,
    Alive,
    Dead,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusNode {
    pub id: NodeId,
    pub birth_time: usize,
    pub birth_iteration: usize,
    /// Data point whose exemplar role the node took over at birth.
    pub parent: usize,
    pub features: Vec<Option<Vec<f64>>>,
    pub presence: Vec<Presence>,
    /// Step and iteration at which the pending death chain starts. Moves
    /// forward one step with every revival.
    pub death: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusRegistry {
    n_points: usize,
    n_steps: usize,
    nodes: Vec<ConsensusNode>,
}

impl ConsensusRegistry {
    pub fn new(n_points: usize, n_steps: usize) -> Self {
        Self {
            n_points,
            n_steps,
            nodes: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[ConsensusNode] {
        &self.nodes
    }

    pub fn is_consensus(&self, id: NodeId) -> bool {
        id.0 >= self.n_points
    }

    pub fn get(&self, id: NodeId) -> Option<&ConsensusNode> {
        self.nodes.get(id.0.checked_sub(self.n_points)?)
    }

    fn get_mut(&mut self, id: NodeId) -> &mut ConsensusNode {
        &mut self.nodes[id.0 - self.n_points]
    }

    /// Registers a node alive at `t` only.
    pub fn spawn(&mut self, t: usize, iteration: usize, parent: usize, features: Vec<f64>) -> NodeId {
        let id = NodeId(self.n_points + self.nodes.len());
        let mut node = ConsensusNode {
            id,
            birth_time: t,
            birth_iteration: iteration,
            parent,
            features: vec![None; self.n_steps],
            presence: vec![Presence::Absent; self.n_steps],
            death: None,
        };
        node.features[t] = Some(features);
        node.presence[t] = Presence::Alive;
        self.nodes.push(node);
        id
    }

    pub fn presence(&self, id: NodeId, t: usize) -> Presence {
        self.get(id).map_or(Presence::Absent, |n| n.presence[t])
    }

    pub fn features(&self, id: NodeId, t: usize) -> Option<&[f64]> {
        self.get(id)?.features[t].as_deref()
    }

    pub fn alive_at(&self, t: usize) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.presence[t] == Presence::Alive)
            .map(|n| n.id)
            .collect()
    }

    pub fn set_alive(&mut self, id: NodeId, t: usize, features: Vec<f64>) {
        let node = self.get_mut(id);
        node.presence[t] = Presence::Alive;
        node.features[t] = Some(features);
    }

    /// Marks `id` dead at `t` and every later step.
    pub fn kill(&mut self, id: NodeId, t: usize, iteration: usize) {
        let node = self.get_mut(id);
        for p in &mut node.presence[t..] {
            *p = Presence::Dead;
        }
        for f in &mut node.features[t..] {
            *f = None;
        }
        node.death = Some((t, iteration));
    }

    /// Whether `id`, dead at `t`, died there during the iteration just
    /// before `iteration`.
    pub fn revival_due(&self, id: NodeId, t: usize, iteration: usize) -> bool {
        self.get(id).is_some_and(|n| {
            n.presence[t] == Presence::Dead && matches!(n.death, Some((dt, di)) if dt == t && di + 1 == iteration)
        })
    }

    /// Brings `id` back at `t`; the rest of its death chain stays eligible
    /// for revival at `t + 1` in the same pass.
    pub fn revive(&mut self, id: NodeId, t: usize, features: Vec<f64>) {
        let node = self.get_mut(id);
        node.presence[t] = Presence::Alive;
        node.features[t] = Some(features);
        if let Some((dt, di)) = node.death {
            if dt == t {
                node.death = Some((t + 1, di));
            }
        }
    }

    /// Hands the chain of `young`, which starts at `t`, to `old`: from `t`
    /// on, `old` takes over the presence, features and pending death of
    /// `young`, and `young` is dead.
    pub fn hand_over(&mut self, young: NodeId, old: NodeId, t: usize, iteration: usize) {
        let (presence, features, death) = {
            let y = self.get_mut(young);
            let presence = y.presence[t..].to_vec();
            let features: Vec<_> = y.features[t..].iter_mut().map(Option::take).collect();
            (presence, features, y.death)
        };
        self.kill(young, t, iteration);
        let node = self.get_mut(old);
        node.presence[t..].copy_from_slice(&presence);
        for (slot, f) in node.features[t..].iter_mut().zip(features) {
            *slot = f;
        }
        node.death = death;
    }

    /// Alive nodes at `t` not in `exemplars`; they are killed from `t` on.
    pub fn process_deaths(&mut self, exemplars: &[NodeId], t: usize, iteration: usize) -> Vec<NodeId> {
        let dead: Vec<NodeId> = self
            .alive_at(t)
            .into_iter()
            .filter(|id| !exemplars.contains(id))
            .collect();
        for &id in &dead {
            self.kill(id, t, iteration);
        }
        dead
    }

    pub fn to_info(&self) -> BTreeMap<NodeId, ConsensusInfo> {
        self.nodes
            .iter()
            .map(|n| {
                (
                    n.id,
                    ConsensusInfo {
                        parent: n.parent,
                        birth_iteration: n.birth_iteration,
                        features: n.features.clone(),
                    },
                )
            })
            .collect()
    }
}

/// Whether consensus nodes should start being created: every step has at
/// least two exemplars and none exist yet.
pub fn creation_trigger(exemplar_sets: &[Vec<NodeId>], registry: &ConsensusRegistry) -> bool {
    registry.is_empty() && !exemplar_sets.is_empty() && exemplar_sets.iter().all(|e| e.len() >= 2)
}

/// Mean feature vector of the given data points at `t`, skipping inactive
/// ones; `None` if none is active.
pub fn member_mean(ds: &DatasetSeries, t: usize, members: &[usize]) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; ds.dim()];
    let mut count = 0usize;
    for x in members.iter().filter_map(|&i| ds.features(t, i)) {
        sum.iter_mut().zip(x).for_each(|(s, v)| *s += v);
        count += 1;
    }
    (count > 0).then(|| sum.into_iter().map(|s| s / count as f64).collect())
}
