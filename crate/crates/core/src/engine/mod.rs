//! The forward-backward EAP message engine.
//!
//! One iteration is a forward pass (for `t = 0..T`: δ from `t − 1`, then ρ,
//! then α, then exemplar identification and the consensus lifecycle at `t`)
//! followed by a backward pass (for `t = T−1..0`: φ from `t + 1`, then ρ,
//! then α). Convergence is checked after the forward pass.

mod layer;

use alloc::vec;
use alloc::vec::Vec;

pub use layer::Layer;

use crate::activity::{nn_by_messages, nn_insert_first_iter, seed_deletion, seed_insertion, ActivitySets};
use crate::consensus::{creation_trigger, member_mean, ConsensusRegistry, Presence};
use crate::dataseries::DatasetSeries;
use crate::error::{Error, Result};
use crate::similarity::{neg_sq_dist, SimilarityTensor};
use crate::solution::{ClusteringSolution, NodeId};
use crate::static_ap::{availability_sweep, responsibility_sweep};
use crate::temporal::{bound_violations, smoothing_sweep, BranchCounts, SmoothingParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EapConfig {
    /// Penalty for changing exemplar between consecutive steps.
    pub gamma: f64,
    /// Reward for staying with a consensus node; `0 ≤ omega ≤ gamma`.
    pub omega: f64,
    pub lambda: f64,
    pub max_iter: usize,
    /// Forward passes the last step's exemplars must stay unchanged.
    pub conv_window: usize,
    /// Smallest cluster that spawns a consensus node.
    pub min_cluster_size: usize,
    /// Carried into results; the engine itself is deterministic.
    pub seed: u64,
    /// Enables consensus-node creation once every step has two exemplars.
    pub consensus: bool,
    /// Enables neighbour seeding of temporal messages for points entering
    /// or leaving the dataset.
    pub activity: bool,
    /// Checks message bounds and node activity after every pass.
    pub instrument: bool,
}

impl Default for EapConfig {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            omega: 1.0,
            lambda: 0.9,
            max_iter: 500,
            conv_window: 20,
            min_cluster_size: 1,
            seed: 0,
            consensus: true,
            activity: true,
            instrument: false,
        }
    }
}

impl EapConfig {
    /// Temporal smoothing only: no consensus nodes and no consensus reward.
    pub fn without_consensus(self) -> Self {
        Self {
            consensus: false,
            omega: 0.0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad("gamma must be finite and non-negative");
        }
        if !(self.omega.is_finite() && self.omega >= 0.0 && self.omega <= self.gamma) {
            return bad("omega must lie in [0, gamma]");
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return bad("lambda must lie in [0, 1)");
        }
        if self.max_iter == 0 || self.conv_window == 0 || self.min_cluster_size == 0 {
            return bad("max_iter, conv_window and min_cluster_size must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LifecycleKind {
    Birth,
    Death,
    Swap,
    Replication,
    Revival,
    HandOver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LifecycleEvent {
    pub iteration: usize,
    pub t: usize,
    pub kind: LifecycleKind,
    pub node: NodeId,
    /// Data exemplar or consensus node the event acted on, if any.
    pub other: Option<NodeId>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EngineStats {
    pub iterations: usize,
    pub converged: bool,
    /// ρ/α updates applied at every step (identical across steps).
    pub ap_updates_per_step: usize,
    /// Message entries written by each iteration.
    pub entry_updates_per_iteration: Vec<u64>,
    /// Consensus births, deaths, swaps, replications and revivals in each
    /// forward pass.
    pub events_per_iteration: Vec<usize>,
    pub branches: BranchCounts,
    /// δ/φ entries outside their bounds, summed over checked passes.
    pub bound_violations: usize,
    /// Layer nodes that are inactive data points or non-live consensus nodes.
    pub inactive_accesses: usize,
    pub bound_checks: usize,
    pub births: usize,
    pub deaths: usize,
    pub revivals: usize,
    pub swaps: usize,
    /// Younger chains renamed to the node they continue.
    pub handovers: usize,
    pub replications: usize,
    /// Every lifecycle event in order; filled only when instrumented.
    pub lifecycle_log: Vec<LifecycleEvent>,
    /// Entering or leaving points with no neighbour to copy messages from.
    pub unseeded: usize,
}

impl EngineStats {
    pub fn entry_updates(&self) -> u64 {
        self.entry_updates_per_iteration.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct EapOutput {
    pub solution: ClusteringSolution,
    pub registry: ConsensusRegistry,
    pub stats: EngineStats,
    /// Per-step message state after the final iteration.
    pub layers: Vec<Layer>,
}

/// Exemplar choices at one step, in local indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identification {
    /// Exemplar chosen by each node; consensus rows hold their own
    /// preference, used to detect a consensus node deferring to a data point.
    pub choice: Vec<Option<usize>>,
    /// Exemplars chosen by at least one data point, sorted.
    pub exemplars: Vec<usize>,
}

/// Candidates are nodes with a positive self message sum. A data point picks
/// the best consensus candidate it sends a positive message sum to, if any,
/// otherwise itself when it is a candidate, otherwise the best candidate.
/// Candidates nobody picked are dropped, and data exemplars pick
/// themselves. Ties go to the lowest local index; absent pairs are skipped.
pub fn identify_exemplars(layer: &Layer) -> Identification {
    let n = layer.len();
    if n == 1 {
        return Identification {
            choice: vec![Some(0)],
            exemplars: vec![0],
        };
    }
    let candidates: Vec<usize> = (0..n).filter(|&j| layer.message_sum(j, j) > 0.0).collect();
    let best = |a: usize, pool: &mut dyn Iterator<Item = usize>| -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in pool {
            if layer.s.get(a, j) == f64::NEG_INFINITY {
                continue;
            }
            let v = layer.message_sum(a, j);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        best.map(|(j, _)| j)
    };
    let mut choice = vec![None; n];
    for (a, slot) in choice.iter_mut().enumerate().filter(|(a, _)| !layer.is_consensus(*a)) {
        let mut ec = candidates
            .iter()
            .copied()
            .filter(|&k| layer.is_consensus(k) && layer.message_sum(a, k) > 0.0);
        *slot = best(a, &mut ec)
            .or_else(|| candidates.binary_search(&a).is_ok().then_some(a))
            .or_else(|| best(a, &mut candidates.iter().copied()));
    }
    let mut exemplars: Vec<usize> = choice.iter().flatten().copied().collect();
    exemplars.sort_unstable();
    exemplars.dedup();
    for &e in &exemplars {
        if !layer.is_consensus(e) {
            choice[e] = Some(e);
        }
    }
    // A node left without members once data exemplars pick themselves.
    exemplars.retain(|&e| choice.contains(&Some(e)));
    for a in (0..n).filter(|&a| layer.is_consensus(a)) {
        choice[a] = best(a, &mut candidates.iter().copied());
    }
    Identification { choice, exemplars }
}

/// Runs EAP and returns the clustering.
pub fn run_eap(ds: &DatasetSeries, sim: &SimilarityTensor, cfg: &EapConfig) -> Result<ClusteringSolution> {
    run_eap_detailed(ds, sim, cfg).map(|out| out.solution)
}

/// Runs EAP and returns the clustering with the consensus registry, run
/// statistics and final message state.
pub fn run_eap_detailed(ds: &DatasetSeries, sim: &SimilarityTensor, cfg: &EapConfig) -> Result<EapOutput> {
    cfg.validate()?;
    if sim.n_steps() != ds.n_steps() {
        return Err(Error::Schema("similarity tensor and dataset cover different time steps".into()));
    }
    for t in 0..ds.n_steps() {
        if sim.at(t).points() != ds.active_points(t).as_slice() {
            return Err(Error::Schema(alloc::format!(
                "similarities at t={t} do not cover exactly the active points"
            )));
        }
    }
    let mut engine = Engine::new(ds, sim, *cfg);
    engine.run()?;
    engine.finish()
}

struct Engine<'a> {
    ds: &'a DatasetSeries,
    sim: &'a SimilarityTensor,
    cfg: EapConfig,
    params: SmoothingParams,
    activity: ActivitySets,
    layers: Vec<Layer>,
    registry: ConsensusRegistry,
    /// `[t][i]`: exemplar of data point `i` from the latest forward pass.
    assignment: Vec<Vec<Option<NodeId>>>,
    exemplar_sets: Vec<Vec<NodeId>>,
    consensus_pref: Vec<f64>,
    creation_enabled: bool,
    creation_iteration: usize,
    /// Consensus node each unconverted data exemplar descends from, per step.
    lineage: Vec<alloc::collections::BTreeMap<NodeId, NodeId>>,
    iteration: usize,
    events: usize,
    entries: u64,
    stats: EngineStats,
}

impl<'a> Engine<'a> {
    fn new(ds: &'a DatasetSeries, sim: &'a SimilarityTensor, cfg: EapConfig) -> Self {
        let n_steps = ds.n_steps();
        let layers = sim
            .steps()
            .iter()
            .map(|m| Layer::new(m.points().iter().map(|&i| NodeId(i)).collect(), m.values().clone()))
            .collect();
        let consensus_pref = sim
            .steps()
            .iter()
            .map(|m| (0..m.len()).map(|a| m.preference(a)).fold(f64::INFINITY, f64::min))
            .collect();
        Self {
            ds,
            sim,
            cfg,
            params: SmoothingParams {
                gamma: cfg.gamma,
                omega: cfg.omega,
                lambda: cfg.lambda,
            },
            activity: ActivitySets::from_dataset(ds),
            layers,
            registry: ConsensusRegistry::new(ds.n_points(), n_steps),
            assignment: vec![vec![None; ds.n_points()]; n_steps],
            exemplar_sets: vec![Vec::new(); n_steps],
            consensus_pref,
            creation_enabled: false,
            creation_iteration: 0,
            lineage: vec![alloc::collections::BTreeMap::new(); n_steps],
            iteration: 0,
            events: 0,
            entries: 0,
            stats: EngineStats::default(),
        }
    }

    fn n_steps(&self) -> usize {
        self.layers.len()
    }

    fn run(&mut self) -> Result<()> {
        let mut previous_last: Option<Vec<NodeId>> = None;
        let mut stable = 0;
        for iteration in 1..=self.cfg.max_iter {
            self.iteration = iteration;
            self.events = 0;
            self.entries = 0;
            self.forward_pass();
            self.check_state();
            self.stats.events_per_iteration.push(self.events);
            let last = self.exemplar_sets[self.n_steps() - 1].clone();
            if previous_last.as_ref() == Some(&last) && self.events == 0 {
                stable += 1;
            } else {
                stable = 0;
            }
            previous_last = Some(last);
            if self.cfg.consensus && !self.creation_enabled && creation_trigger(&self.exemplar_sets, &self.registry) {
                self.creation_enabled = true;
                self.creation_iteration = iteration + 1;
            }
            self.stats.iterations = iteration;
            let done = stable >= self.cfg.conv_window && previous_last.as_ref().is_some_and(|e| !e.is_empty());
            if done {
                self.stats.converged = true;
                self.stats.entry_updates_per_iteration.push(self.entries);
                break;
            }
            self.backward_pass();
            self.check_state();
            self.stats.entry_updates_per_iteration.push(self.entries);
        }
        Ok(())
    }

    fn finish(self) -> Result<EapOutput> {
        for (t, row) in self.assignment.iter().enumerate() {
            if (0..self.ds.n_points()).any(|i| self.ds.is_active(t, i) && row[i].is_none()) {
                return Err(Error::NoExemplar {
                    t,
                    iteration: self.iteration,
                });
            }
        }
        let solution = ClusteringSolution::from_assignments(
            self.ds.point_ids().to_vec(),
            self.assignment,
            &self.registry.to_info(),
            self.stats.iterations,
            self.stats.converged,
        );
        Ok(EapOutput {
            solution,
            registry: self.registry,
            stats: self.stats,
            layers: self.layers,
        })
    }

    fn forward_pass(&mut self) {
        for t in 0..self.n_steps() {
            if t > 0 {
                if self.cfg.activity {
                    self.seed_insertions(t);
                }
                let (before, after) = self.layers.split_at_mut(t);
                let (prev, cur) = (&before[t - 1], &mut after[0]);
                let map = cur.map_to(prev);
                let mask = cur.consensus_mask().to_vec();
                self.entries += smoothing_sweep(
                    &mut cur.delta,
                    &prev.rho,
                    &prev.alpha,
                    &prev.phi,
                    &map,
                    &mask,
                    self.params,
                    &mut self.stats.branches,
                ) as u64;
            }
            self.update_ap(t);
            self.lifecycle(t);
        }
        self.stats.ap_updates_per_step += 1;
    }

    fn backward_pass(&mut self) {
        for t in (0..self.n_steps()).rev() {
            if t + 1 < self.n_steps() {
                if self.cfg.activity {
                    self.seed_deletions(t);
                }
                let (before, after) = self.layers.split_at_mut(t + 1);
                let (cur, next) = (&mut before[t], &after[0]);
                let map = cur.map_to(next);
                let mask = cur.consensus_mask().to_vec();
                self.entries += smoothing_sweep(
                    &mut cur.phi,
                    &next.rho,
                    &next.alpha,
                    &next.delta,
                    &map,
                    &mask,
                    self.params,
                    &mut self.stats.branches,
                ) as u64;
            }
            self.update_ap(t);
        }
        self.stats.ap_updates_per_step += 1;
    }

    fn update_ap(&mut self, t: usize) {
        let layer = &mut self.layers[t];
        let lambda = self.cfg.lambda;
        self.entries +=
            responsibility_sweep(&mut layer.rho, &layer.s, &layer.alpha, Some((&layer.delta, &layer.phi)), lambda) as u64;
        self.entries += availability_sweep(&mut layer.alpha, &layer.rho, lambda) as u64;
    }

    /// Copies forward messages from a neighbour into points entering at `t`.
    fn seed_insertions(&mut self, t: usize) {
        let entering = self.activity.insertions(t);
        if entering.is_empty() {
            return;
        }
        let pool: Vec<usize> = self.activity.both_prev(t).to_vec();
        let msum = (self.iteration > 1).then(|| self.layers[t].message_sum_matrix());
        for b in entering {
            let nn = self.neighbour(t, b, &pool, msum.as_ref());
            let layer = &mut self.layers[t];
            match nn {
                Some(nn) => {
                    let lb = layer.local(NodeId(b)).unwrap();
                    seed_insertion(&mut layer.delta, lb, nn);
                }
                None => self.stats.unseeded += 1,
            }
        }
    }

    /// Copies backward messages from a neighbour into points leaving after `t`.
    fn seed_deletions(&mut self, t: usize) {
        let leaving = self.activity.deletions(t);
        if leaving.is_empty() {
            return;
        }
        let pool: Vec<usize> = self.activity.both_next(t).to_vec();
        let msum = (self.iteration > 1).then(|| self.layers[t].message_sum_matrix());
        for d in leaving {
            let nn = self.neighbour(t, d, &pool, msum.as_ref());
            let layer = &mut self.layers[t];
            match nn {
                Some(nn) => {
                    let ld = layer.local(NodeId(d)).unwrap();
                    seed_deletion(&mut layer.phi, ld, nn);
                }
                None => self.stats.unseeded += 1,
            }
        }
    }

    /// Local index at `t` of the neighbour of data point `x` within `pool`:
    /// by similarity in the first iteration, by message rows afterwards.
    fn neighbour(&mut self, t: usize, x: usize, pool: &[usize], msum: Option<&crate::matrix::SquareMatrix>) -> Option<usize> {
        let layer = &self.layers[t];
        if self.cfg.instrument {
            self.stats.inactive_accesses += pool.iter().filter(|&&j| !self.ds.is_active(t, j)).count();
        }
        let found = match msum {
            None => nn_insert_first_iter(self.sim.at(t), t, x, pool).ok().and_then(|j| layer.local(NodeId(j))),
            Some(m) => {
                let local: Vec<usize> = pool.iter().filter_map(|&j| layer.local(NodeId(j))).collect();
                nn_by_messages(m, t, layer.local(NodeId(x))?, &local, &local).ok()
            }
        };
        found
    }

    fn check_state(&mut self) {
        if !self.cfg.instrument {
            return;
        }
        self.stats.bound_checks += 1;
        for (t, layer) in self.layers.iter().enumerate() {
            let mask = layer.consensus_mask();
            self.stats.bound_violations += bound_violations(&layer.delta, mask, self.cfg.gamma, self.cfg.omega);
            self.stats.bound_violations += bound_violations(&layer.phi, mask, self.cfg.gamma, self.cfg.omega);
            for &id in layer.ids() {
                let live = if self.registry.is_consensus(id) {
                    self.registry.presence(id, t) == Presence::Alive
                } else {
                    self.ds.is_active(t, id.0)
                };
                if !live {
                    self.stats.inactive_accesses += 1;
                }
            }
        }
    }

    fn features(&self, t: usize, id: NodeId) -> Option<&[f64]> {
        if self.registry.is_consensus(id) {
            self.registry.features(id, t)
        } else {
            self.ds.features(t, id.0)
        }
    }

    /// Similarities of consensus node `k` to every node of layer `t`.
    fn consensus_similarities(&self, t: usize, k: NodeId) -> Vec<f64> {
        let x = self.features(t, k).expect("consensus node has features where alive");
        self.layers[t]
            .ids()
            .iter()
            .map(|&j| match (j == k, self.features(t, j)) {
                (true, _) => 0.0,
                (false, Some(y)) => neg_sq_dist(x, y),
                (false, None) => f64::NEG_INFINITY,
            })
            .collect()
    }

    fn members(&self, t: usize, e: NodeId) -> Vec<usize> {
        (0..self.ds.n_points()).filter(|&i| self.assignment[t][i] == Some(e)).collect()
    }

    fn reassign(&mut self, t: usize, from: NodeId, to: NodeId) {
        for e in self.assignment[t].iter_mut().filter(|e| **e == Some(from)) {
            *e = Some(to);
        }
        let set = &mut self.exemplar_sets[t];
        set.retain(|&e| e != from);
        if let Err(at) = set.binary_search(&to) {
            set.insert(at, to);
        }
    }

    /// Identification and consensus bookkeeping at step `t` of a forward pass.
    fn lifecycle(&mut self, t: usize) {
        let ident = identify_exemplars(&self.layers[t]);
        let ids = self.layers[t].ids().to_vec();
        let mut row = vec![None; self.ds.n_points()];
        let mut deferrals = Vec::new();
        for (a, &id) in ids.iter().enumerate() {
            let chosen = ident.choice[a].map(|e| ids[e]);
            if self.registry.is_consensus(id) {
                deferrals.push((id, chosen));
            } else {
                row[id.0] = chosen;
            }
        }
        let previous = core::mem::replace(&mut self.assignment[t], row);
        self.exemplar_sets[t] = ident.exemplars.iter().map(|&e| ids[e]).collect();

        // An unchosen consensus node that prefers a data exemplar takes over
        // that exemplar's messages and members.
        for (k, chosen) in deferrals {
            let Some(i) = chosen else { continue };
            let set = &self.exemplar_sets[t];
            if set.contains(&k) || self.registry.is_consensus(i) || !set.contains(&i) {
                continue;
            }
            let layer = &mut self.layers[t];
            let (li, lk) = (layer.local(i).unwrap(), layer.local(k).unwrap());
            layer.transfer_role(li, lk);
            self.reassign(t, i, k);
            self.stats.swaps += 1;
            self.note(LifecycleKind::Swap, t, k, Some(i));
            self.events += 1;
        }

        if self.creation_enabled {
            let data_exemplars: Vec<NodeId> =
                self.exemplar_sets[t].iter().copied().filter(|&e| !self.registry.is_consensus(e)).collect();
            for i in data_exemplars {
                let members = self.members(t, i);
                if members.len() < self.cfg.min_cluster_size {
                    continue;
                }
                if self.iteration == self.creation_iteration {
                    if let Some(k) = self.ancestor(t, &members) {
                        self.lineage[t].insert(i, k);
                        continue;
                    }
                } else if plurality(members.iter().filter_map(|&a| previous[a])) != Some(i) {
                    continue;
                }
                let mean = member_mean(self.ds, t, &members).expect("exemplar has active members");
                let k = self.registry.spawn(t, self.iteration, i.0, mean);
                let sims = self.consensus_similarities(t, k);
                let layer = &mut self.layers[t];
                let lk = layer.insert_consensus(k, &sims, self.consensus_pref[t]);
                let li = layer.local(i).unwrap();
                layer.transfer_role(li, lk);
                self.reassign(t, i, k);
                self.stats.births += 1;
                self.note(LifecycleKind::Birth, t, k, Some(i));
                self.events += 1;
            }
        }

        let live: Vec<NodeId> =
            self.exemplar_sets[t].iter().copied().filter(|&e| self.registry.is_consensus(e)).collect();
        for k in live {
            let mean = member_mean(self.ds, t, &self.members(t, k)).expect("chosen consensus node has members");
            if self.registry.features(k, t) != Some(mean.as_slice()) {
                self.registry.set_alive(k, t, mean);
                let sims = self.consensus_similarities(t, k);
                let layer = &mut self.layers[t];
                let lk = layer.local(k).unwrap();
                layer.set_similarities(lk, &sims);
            }
        }

        let exemplars = self.exemplar_sets[t].clone();
        for k in self.registry.process_deaths(&exemplars, t, self.iteration) {
            for layer in &mut self.layers[t..] {
                layer.remove(k);
            }
            self.stats.deaths += 1;
            self.note(LifecycleKind::Death, t, k, None);
            self.events += 1;
        }

        if t + 1 < self.n_steps() {
            let live: Vec<NodeId> = exemplars.into_iter().filter(|&e| self.registry.is_consensus(e)).collect();
            for k in live {
                match self.registry.presence(k, t + 1) {
                    Presence::Absent => {
                        if self.extend(k, t, Extension::Replicate) {
                            self.stats.replications += 1;
                            self.note(LifecycleKind::Replication, t + 1, k, None);
                        } else {
                            self.registry.kill(k, t + 1, self.iteration);
                            self.stats.deaths += 1;
                            self.note(LifecycleKind::Death, t + 1, k, None);
                        }
                        self.events += 1;
                    }
                    Presence::Dead => {
                        let mode = match self.registry.revival_due(k, t + 1, self.iteration) {
                            true => Extension::Revive,
                            false => Extension::HandOverOnly,
                        };
                        if self.extend(k, t, mode) {
                            self.stats.revivals += usize::from(mode == Extension::Revive);
                            if mode == Extension::Revive {
                                self.note(LifecycleKind::Revival, t + 1, k, None);
                            }
                            self.events += 1;
                        } else if self.adopt_orphans(k, t) {
                            self.stats.revivals += 1;
                            self.note(LifecycleKind::Revival, t + 1, k, None);
                            self.events += 1;
                        }
                    }
                    Presence::Alive => {}
                }
            }
        }
    }

    /// Renames consensus node `young`, whose chain starts at `t`, to `old`
    /// from `t` on.
    fn hand_over(&mut self, young: NodeId, old: NodeId, t: usize) {
        self.registry.hand_over(young, old, t, self.iteration);
        self.relabel_from(young, old, t);
        self.stats.handovers += 1;
        self.note(LifecycleKind::HandOver, t, old, Some(young));
    }

    fn relabel_from(&mut self, young: NodeId, old: NodeId, t: usize) {
        for step in t..self.n_steps() {
            self.layers[step].relabel(young, old);
            for e in self.assignment[step].iter_mut().filter(|e| **e == Some(young)) {
                *e = Some(old);
            }
            let set = &mut self.exemplar_sets[step];
            if let Some(at) = set.iter().position(|&e| e == young) {
                set.remove(at);
                if let Err(at) = set.binary_search(&old) {
                    set.insert(at, old);
                }
            }
        }
    }

    fn note(&mut self, kind: LifecycleKind, t: usize, node: NodeId, other: Option<NodeId>) {
        if self.cfg.instrument {
            let iteration = self.iteration;
            self.stats.lifecycle_log.push(LifecycleEvent { iteration, t, kind, node, other });
        }
    }

    /// Consensus node, chosen at `t`, that most of `members` followed at
    /// `t − 1` directly or through an unconverted data exemplar.
    fn ancestor(&self, t: usize, members: &[usize]) -> Option<NodeId> {
        if t == 0 {
            return None;
        }
        let origin = |e: NodeId| match self.registry.is_consensus(e) {
            true => Some(e),
            false => self.lineage[t - 1].get(&e).copied(),
        };
        let mut counts: alloc::collections::BTreeMap<Option<NodeId>, usize> = alloc::collections::BTreeMap::new();
        for &a in members {
            *counts.entry(self.assignment[t - 1][a].and_then(origin)).or_default() += 1;
        }
        let (best, _) = counts.into_iter().fold((None, 0), |acc, (k, c)| if c > acc.1 { (k, c) } else { acc });
        best.filter(|k| self.exemplar_sets[t].contains(k))
    }

    /// Places consensus node `k` at `t + 1`, following the exemplar most
    /// of its `t` members had at `t + 1`. A consensus node whose chain
    /// starts at `t + 1` is renamed to `k`. A data exemplar hands `k` its
    /// messages and members, and `k`'s features become the mean of its `t`
    /// members at `t + 1`. Fails if no member is active at `t + 1` or the
    /// exemplar is another live consensus node.
    fn extend(&mut self, k: NodeId, t: usize, mode: Extension) -> bool {
        let next = t + 1;
        let members: Vec<usize> = self
            .members(t, k)
            .into_iter()
            .filter(|&i| self.ds.is_active(next, i))
            .collect();
        let Some(source) = plurality(
            members
                .iter()
                .filter_map(|&i| self.assignment[next][i])
                .filter(|&e| self.layers[next].local(e).is_some()),
        ) else {
            return false;
        };
        if self.registry.is_consensus(source) {
            if self.registry.presence(source, t) != Presence::Absent {
                return false;
            }
            self.hand_over(source, k, next);
            return true;
        }
        if mode == Extension::HandOverOnly {
            return false;
        }
        let mean = member_mean(self.ds, next, &members).expect("members are active");
        if mode == Extension::Revive {
            self.registry.revive(k, next, mean);
        } else {
            self.registry.set_alive(k, next, mean);
        }
        let sims = self.consensus_similarities(next, k);
        let layer = &mut self.layers[next];
        let lk = layer.insert_consensus(k, &sims, self.consensus_pref[next]);
        let ls = layer.local(source).unwrap();
        layer.transfer_role(ls, lk);
        self.reassign(next, source, k);
        true
    }

    /// Revives dead `k` at `t + 1` when most of its members there lost
    /// their exemplar to a death earlier in this pass.
    fn adopt_orphans(&mut self, k: NodeId, t: usize) -> bool {
        let next = t + 1;
        let members = self.members(t, k);
        let Some(lost) = plurality(members.iter().filter_map(|&i| self.assignment[next][i])) else {
            return false;
        };
        if !self.registry.is_consensus(lost) || self.layers[next].local(lost).is_some() {
            return false;
        }
        let orphans: Vec<usize> =
            (0..self.ds.n_points()).filter(|&i| self.assignment[next][i] == Some(lost)).collect();
        let layer = &self.layers[next];
        let Some(source) = orphans
            .iter()
            .filter_map(|&i| layer.local(NodeId(i)))
            .max_by(|&a, &b| layer.message_sum(a, a).total_cmp(&layer.message_sum(b, b)).then(b.cmp(&a)))
        else {
            return false;
        };
        let source = layer.ids()[source];
        let mean = member_mean(self.ds, next, &orphans).expect("orphans are active");
        self.registry.revive(k, next, mean);
        let sims = self.consensus_similarities(next, k);
        let layer = &mut self.layers[next];
        let lk = layer.insert_consensus(k, &sims, self.consensus_pref[next]);
        let ls = layer.local(source).unwrap();
        layer.transfer_role(ls, lk);
        self.reassign(next, lost, k);
        self.reassign(next, source, k);
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extension {
    Replicate,
    Revive,
    /// Only rename a younger consensus chain; a dead node is not re-seeded
    /// from data outside the revival window.
    HandOverOnly,
}

/// Most frequent id (smallest on ties).
fn plurality(ids: impl Iterator<Item = NodeId>) -> Option<NodeId> {
    let mut counts: alloc::collections::BTreeMap<NodeId, usize> = alloc::collections::BTreeMap::new();
    for e in ids {
        *counts.entry(e).or_default() += 1;
    }
    counts
        .into_iter()
        .fold(None, |best: Option<(NodeId, usize)>, (e, c)| match best {
            Some((_, b)) if b >= c => best,
            _ => Some((e, c)),
        })
        .map(|(e, _)| e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SquareMatrix;

    fn layer(n_data: usize, consensus: &[NodeId]) -> Layer {
        let mut l = Layer::new((0..n_data).map(NodeId).collect(), SquareMatrix::filled(n_data, -1.0));
        for &k in consensus {
            let sims = vec![-1.0; l.len()];
            l.insert_consensus(k, &sims, -1.0);
        }
        l
    }

    #[test]
    fn consensus_candidate_wins_over_larger_data_sum() {
        let mut l = layer(3, &[NodeId(3)]);
        // Candidates: data 0 and consensus 3.
        l.rho.set(0, 0, 5.0);
        l.rho.set(3, 3, 1.0);
        l.rho.set(1, 0, 4.0);
        l.rho.set(1, 3, 0.5);
        l.rho.set(2, 3, 0.5);
        let id = identify_exemplars(&l);
        assert_eq!(id.choice[1], Some(3));
        assert_eq!(id.choice[2], Some(3));
        assert_eq!(id.choice[0], Some(0));
        assert_eq!(id.exemplars, vec![0, 3]);
    }

    #[test]
    fn plain_argmax_without_consensus() {
        let mut l = layer(3, &[]);
        l.rho.set(1, 1, 1.0);
        l.rho.set(2, 2, 1.0);
        l.rho.set(0, 2, 0.3);
        let id = identify_exemplars(&l);
        assert_eq!(id.choice, vec![Some(2), Some(1), Some(2)]);
        assert_eq!(id.exemplars, vec![1, 2]);
    }

    #[test]
    fn unchosen_candidates_are_pruned() {
        let mut l = layer(3, &[NodeId(3)]);
        l.rho.set(3, 3, 1.0);
        l.rho.set(0, 0, 1.0);
        for a in 1..4 {
            l.rho.set(a, 0, 2.0);
        }
        let id = identify_exemplars(&l);
        assert_eq!(id.exemplars, vec![0]);
        assert_eq!(id.choice[3], Some(0));
    }

    #[test]
    fn single_node_is_own_exemplar() {
        let id = identify_exemplars(&layer(1, &[]));
        assert_eq!(id.choice, vec![Some(0)]);
    }

    #[test]
    fn config_validation() {
        assert!(EapConfig::default().validate().is_ok());
        let bad = EapConfig {
            omega: 3.0,
            ..EapConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        assert!(EapConfig { lambda: 1.0, ..EapConfig::default() }.validate().is_err());
        let nocn = EapConfig::default().without_consensus();
        assert_eq!((nocn.omega, nocn.consensus), (0.0, false));
    }
}
