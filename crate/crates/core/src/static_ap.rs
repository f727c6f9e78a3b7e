//! Classic affinity propagation and the responsibility / availability
//! kernels shared with the temporal engine.

use alloc::vec;
use alloc::vec::Vec;

use alloc::collections::BTreeMap;

use crate::dataseries::DatasetSeries;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::similarity::{SimilarityMatrix, SimilarityTensor};
use crate::solution::{ClusteringSolution, NodeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApConfig {
    pub lambda: f64,
    pub max_iter: usize,
    pub conv_window: usize,
}

impl Default for ApConfig {
    fn default() -> Self {
        Self {
            lambda: 0.9,
            max_iter: 500,
            conv_window: 20,
        }
    }
}

/// Responsibility and availability state for one similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ApMessages {
    pub rho: SquareMatrix,
    pub alpha: SquareMatrix,
    pub lambda: f64,
}

impl ApMessages {
    pub fn zeros(n: usize, lambda: f64) -> Self {
        Self {
            rho: SquareMatrix::zeros(n),
            alpha: SquareMatrix::zeros(n),
            lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApResult {
    /// Local index of the exemplar chosen by each local point.
    pub exemplar_of: Vec<usize>,
    /// Sorted local indices of exemplars.
    pub exemplars: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
}

/// Convex damping of a message update. Infinite values (sparse rows) are
/// taken as-is so that `0 * inf` never appears.
#[inline]
pub(crate) fn damp(lambda: f64, old: f64, new: f64) -> f64 {
    if lambda == 0.0 || !old.is_finite() || !new.is_finite() {
        new
    } else {
        lambda * old + (1.0 - lambda) * new
    }
}

/// Damped responsibility update.
///
/// `ρ_ij ← s_ij + b_ij − max_{k≠j}(α_ik + s_ik + b_ik)` where `b` is the sum
/// of the optional `bias` matrices (the temporal messages; absent for static
/// AP). Returns the number of entries written.
pub(crate) fn responsibility_sweep(
    rho: &mut SquareMatrix,
    s: &SquareMatrix,
    alpha: &SquareMatrix,
    bias: Option<(&SquareMatrix, &SquareMatrix)>,
    lambda: f64,
) -> usize {
    let n = s.dim();
    if n == 1 {
        rho.set(0, 0, damp(lambda, rho.get(0, 0), s.get(0, 0)));
        return 1;
    }
    let mut own = vec![0.0; n];
    for i in 0..n {
        let (s_row, a_row) = (s.row(i), alpha.row(i));
        for k in 0..n {
            own[k] = s_row[k]
                + match bias {
                    Some((b1, b2)) => b1.get(i, k) + b2.get(i, k),
                    None => 0.0,
                };
        }
        let (mut best, mut best_k, mut second) = (f64::NEG_INFINITY, usize::MAX, f64::NEG_INFINITY);
        for k in 0..n {
            let v = a_row[k] + own[k];
            if v > best || best_k == usize::MAX {
                second = best;
                best = v;
                best_k = k;
            } else if v > second {
                second = v;
            }
        }
        let row = rho.row_mut(i);
        for j in 0..n {
            let new = if own[j] == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                own[j] - if j == best_k { second } else { best }
            };
            row[j] = damp(lambda, row[j], new);
        }
    }
    n * n
}

/// Damped availability update:
/// `α_jj ← Σ_{k≠j} max(ρ_kj, 0)` and
/// `α_ij ← min(0, ρ_jj + Σ_{k∉{i,j}} max(ρ_kj, 0))`.
pub(crate) fn availability_sweep(alpha: &mut SquareMatrix, rho: &SquareMatrix, lambda: f64) -> usize {
    let n = rho.dim();
    if n == 1 {
        alpha.set(0, 0, damp(lambda, alpha.get(0, 0), 0.0));
        return 1;
    }
    let mut positive = vec![0.0; n];
    for i in 0..n {
        for (j, r) in rho.row(i).iter().enumerate() {
            if i != j && *r > 0.0 {
                positive[j] += r;
            }
        }
    }
    for i in 0..n {
        let r_row = rho.row(i);
        let a_row = alpha.row_mut(i);
        for j in 0..n {
            let new = if i == j {
                positive[j]
            } else {
                let rest = positive[j] - r_row[j].max(0.0);
                let self_r = rho.get(j, j);
                if self_r == f64::INFINITY {
                    0.0
                } else {
                    (self_r + rest).min(0.0)
                }
            };
            a_row[j] = damp(lambda, a_row[j], new);
        }
    }
    n * n
}

pub fn update_responsibilities(msgs: &mut ApMessages, s: &SimilarityMatrix) {
    responsibility_sweep(&mut msgs.rho, s.values(), &msgs.alpha, None, msgs.lambda);
}

pub fn update_availabilities(msgs: &mut ApMessages) {
    availability_sweep(&mut msgs.alpha, &msgs.rho, msgs.lambda);
}

/// Exemplars are `{j : ρ_jj + α_jj > 0}`; every other point takes the
/// exemplar maximising `ρ_ij + α_ij` among present pairs (lowest index on
/// ties) and exemplars take themselves.
pub fn identify(msgs: &ApMessages, s: &SimilarityMatrix) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = s.len();
    if n == 1 {
        return Some((vec![0], vec![0]));
    }
    let exemplars: Vec<usize> = (0..n)
        .filter(|&j| msgs.rho.get(j, j) + msgs.alpha.get(j, j) > 0.0)
        .collect();
    if exemplars.is_empty() {
        return None;
    }
    let mut assignment = Vec::with_capacity(n);
    for i in 0..n {
        if exemplars.binary_search(&i).is_ok() {
            assignment.push(i);
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for &j in &exemplars {
            if s.get(i, j) == f64::NEG_INFINITY {
                continue;
            }
            let v = msgs.rho.get(i, j) + msgs.alpha.get(i, j);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        assignment.push(best?.0);
    }
    Some((assignment, exemplars))
}

/// Runs affinity propagation on one similarity matrix whose diagonal holds
/// the preferences.
pub fn run_ap(s: &SimilarityMatrix, cfg: &ApConfig) -> Result<ApResult> {
    let n = s.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if n == 1 {
        return Ok(ApResult {
            exemplar_of: vec![0],
            exemplars: vec![0],
            iterations: 0,
            converged: true,
        });
    }
    let mut msgs = ApMessages::zeros(n, cfg.lambda);
    let mut last: Option<Vec<usize>> = None;
    let mut stable = 0;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=cfg.max_iter {
        iterations = it;
        update_responsibilities(&mut msgs, s);
        update_availabilities(&mut msgs);
        let current: Vec<usize> = (0..n)
            .filter(|&j| msgs.rho.get(j, j) + msgs.alpha.get(j, j) > 0.0)
            .collect();
        if last.as_ref() == Some(&current) {
            stable += 1;
        } else {
            stable = 0;
            last = Some(current);
        }
        if stable >= cfg.conv_window && last.as_ref().is_some_and(|e| !e.is_empty()) {
            converged = true;
            break;
        }
    }
    let (exemplar_of, exemplars) = identify(&msgs, s).ok_or(Error::NoExemplar {
        t: 0,
        iteration: iterations,
    })?;
    Ok(ApResult {
        exemplar_of,
        exemplars,
        iterations,
        converged,
    })
}

/// Independent affinity propagation at every step, as a clustering whose
/// tracks are maximal runs of each data exemplar. Converged only if every
/// step converged; `iterations` is the largest per-step count.
pub fn run_ap_series(ds: &DatasetSeries, sim: &SimilarityTensor, cfg: &ApConfig) -> Result<ClusteringSolution> {
    let results = (0..sim.n_steps())
        .map(|t| run_ap(sim.at(t), cfg).map_err(|e| with_step(e, t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(solution_from_steps(ds, sim, &results))
}

/// Re-labels a per-step error with the step it came from.
pub fn with_step(e: Error, t: usize) -> Error {
    match e {
        Error::NoExemplar { iteration, .. } => Error::NoExemplar { t, iteration },
        other => other,
    }
}

/// Assembles per-step results (local indices) into a clustering over the
/// dataset's points.
pub fn solution_from_steps(ds: &DatasetSeries, sim: &SimilarityTensor, results: &[ApResult]) -> ClusteringSolution {
    let mut exemplar_of = vec![vec![None; ds.n_points()]; results.len()];
    for (t, r) in results.iter().enumerate() {
        let points = sim.at(t).points();
        for (local, &e) in r.exemplar_of.iter().enumerate() {
            exemplar_of[t][points[local]] = Some(NodeId(points[e]));
        }
    }
    ClusteringSolution::from_assignments(
        ds.point_ids().to_vec(),
        exemplar_of,
        &BTreeMap::new(),
        results.iter().map(|r| r.iterations).max().unwrap_or(0),
        results.iter().all(|r| r.converged),
    )
}

/// Net similarity of an assignment: `Σ_{i∉E} s(i, e_i) + Σ_{j∈E} s_jj`.
pub fn net_similarity(s: &SimilarityMatrix, exemplar_of: &[usize]) -> f64 {
    exemplar_of
        .iter()
        .enumerate()
        .map(|(i, &e)| s.get(i, e))
        .sum()
}
