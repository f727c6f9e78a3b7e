//! Temporal smoothing messages.
//!
//! `δ^t_ij` carries evidence from step `t−1` forward and `φ^{t−1}_ij` carries
//! evidence from step `t` backward, both through the pairwise factor linking
//! `c_ij^{t−1}` and `c_ij^t`. That factor costs `γ` for a change of
//! assignment, nothing for staying assigned to a consensus node, and `ω`
//! otherwise, with `γ ≥ ω ≥ 0`.

use crate::matrix::SquareMatrix;
use crate::static_ap::damp;

/// Which case of the piecewise message update produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Saturated at the lower bound `−γ + ω`.
    Floor,
    /// Linear region: `ω·1(consensus) + v`.
    Linear,
    /// `−v`; never reached when `γ ≥ ω ≥ 0`.
    Reflected,
    /// Saturated at the upper bound `γ − ω·1(data point)`.
    Ceiling,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BranchCounts {
    pub floor: u64,
    pub linear: u64,
    pub reflected: u64,
    pub ceiling: u64,
}

impl BranchCounts {
    pub fn record(&mut self, branch: Branch) {
        match branch {
            Branch::Floor => self.floor += 1,
            Branch::Linear => self.linear += 1,
            Branch::Reflected => self.reflected += 1,
            Branch::Ceiling => self.ceiling += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.floor + self.linear + self.reflected + self.ceiling
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParams {
    pub gamma: f64,
    pub omega: f64,
    pub lambda: f64,
}

/// Undamped temporal message for incoming evidence `v`.
///
/// For `δ^t_ij`, `v = ρ^{t−1}_ij + α^{t−1}_ij − φ^{t−1}_ij`; for `φ^{t−1}_ij`,
/// `v = ρ^t_ij + α^t_ij − δ^t_ij`. `consensus` says whether `j` is a
/// consensus node.
#[inline]
pub fn smoothing_message(v: f64, gamma: f64, omega: f64, consensus: bool) -> (f64, Branch) {
    let omega_c = if consensus { omega } else { 0.0 };
    let omega_d = if consensus { 0.0 } else { omega };
    let d1 = gamma - omega >= v;
    let d2 = -gamma + omega_d >= v;
    match (d1, d2) {
        (true, true) => (-gamma + omega, Branch::Floor),
        (true, false) => (omega_c + v, Branch::Linear),
        (false, true) => (-v, Branch::Reflected),
        (false, false) => (gamma - omega_d, Branch::Ceiling),
    }
}

/// Closed form of [`smoothing_message`] for `γ ≥ ω ≥ 0`:
/// `clamp(ω·1(consensus) + v, −γ + ω, γ − ω·1(data point))`.
#[inline]
pub fn smoothing_clamp(v: f64, gamma: f64, omega: f64, consensus: bool) -> f64 {
    let (shift, hi) = if consensus { (omega, gamma) } else { (0.0, gamma - omega) };
    (shift + v).max(-gamma + omega).min(hi)
}

/// Inclusive bounds every temporal message towards `j` must respect.
#[inline]
pub fn bounds(gamma: f64, omega: f64, consensus: bool) -> (f64, f64) {
    (-gamma + omega, if consensus { gamma } else { gamma - omega })
}

/// Recomputes one temporal message matrix from the adjacent time step.
///
/// `target` is `δ^t` (forward) or `φ^{t−1}` (backward). `map[a]` is the local
/// index in the adjacent step of local node `a`, and the adjacent matrices
/// `rho`, `alpha`, `other` are indexed by those. `other` is `φ` for a forward
/// update and `δ` for a backward update. A pair with no counterpart has no
/// temporal factor: it decays towards zero if it involves a consensus node
/// and otherwise keeps its seeded value. Returns the number of entries
/// written.
#[allow(clippy::too_many_arguments)]
pub fn smoothing_sweep(
    target: &mut SquareMatrix,
    rho: &SquareMatrix,
    alpha: &SquareMatrix,
    other: &SquareMatrix,
    map: &[Option<usize>],
    consensus: &[bool],
    params: SmoothingParams,
    counts: &mut BranchCounts,
) -> usize {
    let n = target.dim();
    debug_assert_eq!(map.len(), n);
    let mut written = 0;
    for a in 0..n {
        let row = target.row_mut(a);
        for b in 0..n {
            let (Some(pa), Some(pb)) = (map[a], map[b]) else {
                if consensus[a] || consensus[b] {
                    row[b] = damp(params.lambda, row[b], 0.0);
                    written += 1;
                }
                continue;
            };
            let v = rho.get(pa, pb) + alpha.get(pa, pb) - other.get(pa, pb);
            let (m, branch) = smoothing_message(v, params.gamma, params.omega, consensus[b]);
            debug_assert!(
                branch != Branch::Reflected || params.gamma < params.omega,
                "reflected branch reached with gamma >= omega"
            );
            counts.record(branch);
            row[b] = damp(params.lambda, row[b], m);
            written += 1;
        }
    }
    written
}

/// Counts entries of `m` outside the admissible interval for their column.
pub fn bound_violations(m: &SquareMatrix, consensus: &[bool], gamma: f64, omega: f64) -> usize {
    let tol = 1e-12 * (1.0 + gamma);
    let n = m.dim();
    let mut bad = 0;
    for a in 0..n {
        for (b, v) in m.row(a).iter().enumerate() {
            let (lo, hi) = bounds(gamma, omega, consensus[b]);
            if !(*v >= lo - tol && *v <= hi + tol) {
                bad += 1;
            }
        }
    }
    bad
}
