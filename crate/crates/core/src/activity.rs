//! Points that enter or leave the dataset part-way through the horizon.
//!
//! A point appearing at `t` has no temporal message from `t − 1`, so its
//! forward messages are borrowed from its nearest neighbour among points
//! active at both steps. Departures mirror this for backward messages.

use alloc::vec::Vec;

use crate::dataseries::DatasetSeries;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::similarity::SimilarityMatrix;

/// Per-step active sets and their overlaps with neighbouring steps. All
/// lists hold sorted dataset indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivitySets {
    active: Vec<Vec<usize>>,
    with_prev: Vec<Vec<usize>>,
    with_next: Vec<Vec<usize>>,
}

impl ActivitySets {
    pub fn from_dataset(ds: &DatasetSeries) -> Self {
        let n_steps = ds.n_steps();
        let active: Vec<Vec<usize>> = (0..n_steps).map(|t| ds.active_points(t)).collect();
        let with_prev = (0..n_steps)
            .map(|t| match t {
                0 => Vec::new(),
                _ => active[t].iter().copied().filter(|&i| ds.is_active(t - 1, i)).collect(),
            })
            .collect();
        let with_next = (0..n_steps)
            .map(|t| match t + 1 < n_steps {
                true => active[t].iter().copied().filter(|&i| ds.is_active(t + 1, i)).collect(),
                false => Vec::new(),
            })
            .collect();
        Self {
            active,
            with_prev,
            with_next,
        }
    }

    pub fn n_steps(&self) -> usize {
        self.active.len()
    }

    pub fn active(&self, t: usize) -> &[usize] {
        &self.active[t]
    }

    /// Points active at `t` and `t − 1` (empty at the first step).
    pub fn both_prev(&self, t: usize) -> &[usize] {
        &self.with_prev[t]
    }

    /// Points active at `t` and `t + 1` (empty at the last step).
    pub fn both_next(&self, t: usize) -> &[usize] {
        &self.with_next[t]
    }

    /// Points active at `t` but not at `t − 1`; none at the first step.
    pub fn insertions(&self, t: usize) -> Vec<usize> {
        if t == 0 {
            return Vec::new();
        }
        difference(&self.active[t], &self.with_prev[t])
    }

    /// Points active at `t` but not at `t + 1`; none at the last step.
    pub fn deletions(&self, t: usize) -> Vec<usize> {
        if t + 1 >= self.n_steps() {
            return Vec::new();
        }
        difference(&self.active[t], &self.with_next[t])
    }
}

fn difference(all: &[usize], remove: &[usize]) -> Vec<usize> {
    all.iter().copied().filter(|i| remove.binary_search(i).is_err()).collect()
}

/// Most similar candidate to `b` at step `t` (lowest index on ties).
/// `b` and `candidates` are dataset indices active in `sim`.
pub fn nn_insert_first_iter(sim: &SimilarityMatrix, t: usize, b: usize, candidates: &[usize]) -> Result<usize> {
    let lb = sim.local(b).ok_or(Error::NoNeighbor { t })?;
    let mut best: Option<(usize, f64)> = None;
    for &j in candidates {
        let Some(lj) = sim.local(j) else { continue };
        let s = sim.get(lb, lj);
        if best.is_none_or(|(bj, v)| s > v || (s == v && j < bj)) {
            best = Some((j, s));
        }
    }
    best.map(|(j, _)| j).ok_or(Error::NoNeighbor { t })
}

/// Candidate whose row of the message sum `msum` is closest in Euclidean
/// norm to row `x`, comparing only `columns`. Indices are local to `msum`;
/// ties go to the lowest index.
pub fn nn_by_messages(msum: &SquareMatrix, t: usize, x: usize, candidates: &[usize], columns: &[usize]) -> Result<usize> {
    if columns.is_empty() {
        return Err(Error::NoNeighbor { t });
    }
    let row_x = msum.row(x);
    let mut best: Option<(usize, f64)> = None;
    for &j in candidates {
        let row_j = msum.row(j);
        let d: f64 = columns.iter().map(|&c| (row_x[c] - row_j[c]) * (row_x[c] - row_j[c])).sum();
        if best.is_none_or(|(bj, v)| d < v || (d == v && j < bj)) {
            best = Some((j, d));
        }
    }
    best.map(|(j, _)| j).ok_or(Error::NoNeighbor { t })
}

/// Gives inserted node `b` the forward messages of `nn` (row, column and
/// self-entry of `delta`).
pub fn seed_insertion(delta: &mut SquareMatrix, b: usize, nn: usize) {
    delta.copy_node(nn, b);
}

/// Gives departing node `d` the backward messages of `nn` (row, column and
/// self-entry of `phi`).
pub fn seed_deletion(phi: &mut SquareMatrix, d: usize, nn: usize) {
    phi.copy_node(nn, d);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataseries::Observation;
    use crate::similarity::build_similarity;
    use alloc::string::ToString;
    use alloc::vec;

    fn obs(id: &str, t: usize, x: f64) -> Observation {
        Observation {
            point_id: id.to_string(),
            t,
            features: vec![Some(x), Some(0.0)],
            label: None,
        }
    }

    #[test]
    fn sets_follow_presence() {
        let ds = DatasetSeries::from_observations(vec![
            obs("a", 0, 0.0),
            obs("a", 1, 0.0),
            obs("a", 2, 0.0),
            obs("b", 1, 1.0),
            obs("b", 2, 1.0),
            obs("c", 0, 2.0),
            obs("c", 1, 2.0),
        ])
        .unwrap();
        let sets = ActivitySets::from_dataset(&ds);
        assert_eq!(sets.both_prev(1), &[0, 2]);
        assert_eq!(sets.insertions(1), vec![1]);
        assert_eq!(sets.insertions(0), Vec::<usize>::new());
        assert_eq!(sets.deletions(1), vec![2]);
        assert_eq!(sets.deletions(2), Vec::<usize>::new());
        assert_eq!(sets.both_next(2), &[] as &[usize]);
    }

    #[test]
    fn nearest_by_similarity() {
        let ds = DatasetSeries::from_observations(vec![obs("b", 0, 0.0), obs("p", 0, 1.0), obs("q", 0, 5.0)]).unwrap();
        let sim = build_similarity(&ds);
        assert_eq!(nn_insert_first_iter(sim.at(0), 0, 0, &[1, 2]).unwrap(), 1);
        assert_eq!(nn_insert_first_iter(sim.at(0), 0, 0, &[2]).unwrap(), 2);
        assert_eq!(nn_insert_first_iter(sim.at(0), 0, 0, &[]), Err(Error::NoNeighbor { t: 0 }));
    }

    #[test]
    fn similarity_tie_takes_lowest_index() {
        let ds = DatasetSeries::from_observations(vec![obs("b", 0, 0.0), obs("p", 0, 1.0), obs("q", 0, -1.0)]).unwrap();
        let sim = build_similarity(&ds);
        assert_eq!(nn_insert_first_iter(sim.at(0), 0, 0, &[2, 1]).unwrap(), 1);
    }

    #[test]
    fn nearest_by_message_rows() {
        let m = SquareMatrix::from_rows(3, vec![1.0, 2.0, 3.0, 1.0, 2.0, 9.0, 0.0, 0.0, 3.0]);
        // Over columns {0, 1}: row 1 is identical to row 0, row 2 is at distance √5.
        assert_eq!(nn_by_messages(&m, 0, 0, &[2, 1], &[0, 1]).unwrap(), 1);
        // Over column {2}: distances 6 and 0.
        assert_eq!(nn_by_messages(&m, 0, 0, &[1, 2], &[2]).unwrap(), 2);
        assert!(nn_by_messages(&m, 4, 0, &[1], &[]).is_err());
    }

    #[test]
    fn seeding_copies_row_column_and_self_entry() {
        let mut delta = SquareMatrix::from_rows(3, (0..9).map(f64::from).collect());
        seed_insertion(&mut delta, 2, 0);
        assert_eq!(delta.row(2), &[0.0, 1.0, 0.0]);
        assert_eq!(delta.get(1, 2), 3.0);
        assert_eq!(delta.get(2, 2), 0.0);
        let mut phi = SquareMatrix::from_rows(2, vec![5.0, 6.0, 7.0, 8.0]);
        seed_deletion(&mut phi, 0, 1);
        assert_eq!(phi.as_slice(), &[8.0, 8.0, 8.0, 8.0]);
    }
}
