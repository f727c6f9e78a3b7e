use alloc::vec::Vec;

use crate::matrix::SquareMatrix;
use crate::solution::NodeId;

/// Similarities and the four message families over the nodes present at
/// one time step. Rows and columns follow `ids`, which is sorted, so data
/// points precede consensus nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    ids: Vec<NodeId>,
    consensus: Vec<bool>,
    pub s: SquareMatrix,
    pub alpha: SquareMatrix,
    pub rho: SquareMatrix,
    pub delta: SquareMatrix,
    pub phi: SquareMatrix,
}

impl Layer {
    /// Data-only layer with zero messages.
    pub fn new(ids: Vec<NodeId>, s: SquareMatrix) -> Self {
        let n = ids.len();
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        Self {
            consensus: alloc::vec![false; n],
            ids,
            s,
            alpha: SquareMatrix::zeros(n),
            rho: SquareMatrix::zeros(n),
            delta: SquareMatrix::zeros(n),
            phi: SquareMatrix::zeros(n),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn consensus_mask(&self) -> &[bool] {
        &self.consensus
    }

    pub fn is_consensus(&self, a: usize) -> bool {
        self.consensus[a]
    }

    pub fn local(&self, id: NodeId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    /// `α + ρ + δ + φ` at `(a, b)`.
    #[inline]
    pub fn message_sum(&self, a: usize, b: usize) -> f64 {
        self.alpha.get(a, b) + self.rho.get(a, b) + self.delta.get(a, b) + self.phi.get(a, b)
    }

    pub fn message_sum_matrix(&self) -> SquareMatrix {
        let n = self.len();
        let mut m = SquareMatrix::zeros(n);
        for a in 0..n {
            for b in 0..n {
                m.set(a, b, self.message_sum(a, b));
            }
        }
        m
    }

    /// Index in `other` of every node of `self`.
    pub fn map_to(&self, other: &Layer) -> Vec<Option<usize>> {
        self.ids.iter().map(|&id| other.local(id)).collect()
    }

    /// Adds a consensus node with zero messages. `sims[a]` is its similarity
    /// to the current node `a`; `pref` is its self-similarity. Returns its
    /// local index.
    pub fn insert_consensus(&mut self, id: NodeId, sims: &[f64], pref: f64) -> usize {
        debug_assert_eq!(sims.len(), self.len());
        let at = self.ids.binary_search(&id).expect_err("node already present");
        self.ids.insert(at, id);
        self.consensus.insert(at, true);
        self.s.insert(at, 0.0);
        for m in [&mut self.alpha, &mut self.rho, &mut self.delta, &mut self.phi] {
            m.insert(at, 0.0);
        }
        for (b, &v) in sims.iter().enumerate() {
            let b = if b >= at { b + 1 } else { b };
            self.s.set(at, b, v);
            self.s.set(b, at, v);
        }
        self.s.set(at, at, pref);
        at
    }

    pub fn remove(&mut self, id: NodeId) -> bool {
        let Some(at) = self.local(id) else { return false };
        let keep: Vec<bool> = (0..self.len()).map(|a| a != at).collect();
        self.ids.remove(at);
        self.consensus.remove(at);
        for m in [&mut self.s, &mut self.alpha, &mut self.rho, &mut self.delta, &mut self.phi] {
            m.retain(&keep);
        }
        true
    }

    /// Overwrites the off-diagonal similarities of node `a`.
    pub fn set_similarities(&mut self, a: usize, sims: &[f64]) {
        for (b, &v) in sims.iter().enumerate() {
            if b != a {
                self.s.set(a, b, v);
                self.s.set(b, a, v);
            }
        }
    }

    /// Renames consensus node `old` to `new`, keeping its similarities and
    /// messages.
    pub fn relabel(&mut self, old: NodeId, new: NodeId) {
        let Some(src) = self.local(old) else { return };
        let sims = self.s.row(src).to_vec();
        let pref = self.s.get(src, src);
        let dst = self.insert_consensus(new, &sims, pref);
        let src = self.local(old).expect("old node still present");
        for m in [&mut self.s, &mut self.alpha, &mut self.rho, &mut self.delta, &mut self.phi] {
            m.copy_node(src, dst);
        }
        self.remove(old);
    }

    /// Hands the exemplar role of `src` to `dst`: all four message families
    /// of `src` (row, column, self-entry) are copied to `dst`; then `dst`'s
    /// availability towards `src` is set to `src`'s availability towards its
    /// best other data node by message sum, and `src`'s availability towards
    /// `dst` is set to zero.
    pub fn transfer_role(&mut self, src: usize, dst: usize) {
        let runner_up = (0..self.len())
            .filter(|&j| j != src && j != dst && !self.consensus[j])
            .map(|j| (j, self.message_sum(src, j)))
            .fold(None, |best: Option<(usize, f64)>, (j, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((j, v)),
            })
            .map(|(j, _)| j);
        for m in [&mut self.alpha, &mut self.rho, &mut self.delta, &mut self.phi] {
            m.copy_node(src, dst);
        }
        if let Some(y) = runner_up {
            let v = self.alpha.get(src, y);
            self.alpha.set(dst, src, v);
        }
        self.alpha.set(src, dst, 0.0);
    }
}
