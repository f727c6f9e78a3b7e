//! Pairwise similarities and preferences.
//!
//! Each time step has a dense matrix over the points active at that step.
//! Absent pairs (sparse mode) hold `f64::NEG_INFINITY` and are skipped by
//! every maximisation.

use alloc::vec::Vec;

use crate::dataseries::DatasetSeries;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// How the diagonal (self-similarity) is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PreferenceMode {
    /// Minimum off-diagonal similarity at each time step.
    PerTimeMin,
    /// Minimum off-diagonal similarity over all time steps.
    GlobalMin,
    Constant(f64),
}

/// Similarities among the points active at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    points: Vec<usize>,
    values: SquareMatrix,
}

impl SimilarityMatrix {
    /// `points[a]` is the dataset index of local row `a`.
    pub fn new(points: Vec<usize>, values: SquareMatrix) -> Self {
        assert_eq!(points.len(), values.dim());
        Self { points, values }
    }

    /// Sparse construction: only the listed pairs are present (symmetrically);
    /// the diagonal starts at zero.
    pub fn from_pairs(points: Vec<usize>, pairs: &[(usize, usize, f64)]) -> Self {
        let n = points.len();
        let mut values = SquareMatrix::filled(n, f64::NEG_INFINITY);
        for a in 0..n {
            values.set(a, a, 0.0);
        }
        for &(a, b, s) in pairs {
            values.set(a, b, s);
            values.set(b, a, s);
        }
        Self { points, values }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn values(&self) -> &SquareMatrix {
        &self.values
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values.get(a, b)
    }

    pub fn preference(&self, a: usize) -> f64 {
        self.values.get(a, a)
    }

    /// Local index of dataset point `i`, if active.
    pub fn local(&self, i: usize) -> Option<usize> {
        self.points.binary_search(&i).ok()
    }

    /// Minimum present off-diagonal similarity.
    pub fn min_off_diagonal(&self) -> Option<f64> {
        let n = self.len();
        (0..n)
            .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
            .map(|(a, b)| self.values.get(a, b))
            .filter(|s| s.is_finite())
            .reduce(f64::min)
    }

    fn set_diagonal(&mut self, value: f64) {
        for a in 0..self.len() {
            self.values.set(a, a, value);
        }
    }
}

/// One [`SimilarityMatrix`] per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityTensor {
    steps: Vec<SimilarityMatrix>,
}

impl SimilarityTensor {
    pub fn new(steps: Vec<SimilarityMatrix>) -> Self {
        Self { steps }
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn at(&self, t: usize) -> &SimilarityMatrix {
        &self.steps[t]
    }

    pub fn steps(&self) -> &[SimilarityMatrix] {
        &self.steps
    }
}

/// Negative squared Euclidean distance.
#[inline]
pub fn neg_sq_dist(x: &[f64], y: &[f64]) -> f64 {
    -x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

/// Negative squared Euclidean similarity between all active pairs; the
/// diagonal is left at zero for [`set_preferences`].
pub fn build_similarity(ds: &DatasetSeries) -> SimilarityTensor {
    let steps = (0..ds.n_steps())
        .map(|t| {
            let points = ds.active_points(t);
            let n = points.len();
            let mut values = SquareMatrix::zeros(n);
            for a in 0..n {
                let xa = ds.features(t, points[a]).unwrap();
                for b in a + 1..n {
                    let s = neg_sq_dist(xa, ds.features(t, points[b]).unwrap());
                    values.set(a, b, s);
                    values.set(b, a, s);
                }
            }
            SimilarityMatrix::new(points, values)
        })
        .collect();
    SimilarityTensor::new(steps)
}

pub fn set_preferences(mut sim: SimilarityTensor, mode: PreferenceMode) -> Result<SimilarityTensor> {
    let value_at = |t: usize, m: &SimilarityMatrix| -> Result<f64> {
        m.min_off_diagonal().ok_or(Error::UndefinedMinimum { t })
    };
    match mode {
        PreferenceMode::Constant(c) => sim.steps.iter_mut().for_each(|m| m.set_diagonal(c)),
        PreferenceMode::PerTimeMin => {
            for (t, m) in sim.steps.iter_mut().enumerate() {
                let p = value_at(t, m)?;
                m.set_diagonal(p);
            }
        }
        PreferenceMode::GlobalMin => {
            let global = sim
                .steps
                .iter()
                .filter_map(SimilarityMatrix::min_off_diagonal)
                .reduce(f64::min)
                .ok_or(Error::UndefinedMinimum { t: 0 })?;
            sim.steps.iter_mut().for_each(|m| m.set_diagonal(global));
        }
    }
    Ok(sim)
}
