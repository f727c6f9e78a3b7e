//! Seeded two-dimensional Gaussian mixture benchmarks with ground truth.
//!
//! Randomness comes from ChaCha8 keyed by the user seed. Every
//! `(scenario, t, point)` triple reads its own ChaCha stream, so a draw never
//! depends on how many values other points consumed. Mean random walks use
//! the pseudo-point `0xFFFF_FFFF − component`. Within a stream a point draws
//! its membership uniform (switching steps only) and then its two normal
//! coordinates.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataseries::{normalize_global, DatasetSeries};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    Separated,
    Colliding,
    ClusterChange,
    ThirdCluster,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::Separated,
        ScenarioKind::Colliding,
        ScenarioKind::ClusterChange,
        ScenarioKind::ThirdCluster,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Separated => "separated",
            ScenarioKind::Colliding => "colliding",
            ScenarioKind::ClusterChange => "cluster-change",
            ScenarioKind::ThirdCluster => "third-cluster",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name || k.name().replace('-', "_") == name)
    }

    pub fn default_steps(self) -> usize {
        match self {
            ScenarioKind::Separated => 40,
            _ => 25,
        }
    }

    fn tag(self) -> u64 {
        match self {
            ScenarioKind::Separated => 1,
            ScenarioKind::Colliding => 2,
            ScenarioKind::ClusterChange => 3,
            ScenarioKind::ThirdCluster => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussianScenario {
    pub kind: ScenarioKind,
    pub n_points: usize,
    pub n_steps: usize,
    pub seed: u64,
}

// 0-based steps: membership switches at the 10th and 11th step, the
// covariance widens from the 19th, the first mean drifts on the 2nd to 9th.
const SWITCH_STEPS: [usize; 2] = [9, 10];
const WIDEN_STEP: usize = 18;
const DRIFT_STEPS: core::ops::RangeInclusive<usize> = 1..=8;

impl GaussianScenario {
    pub fn new(kind: ScenarioKind, seed: u64) -> Self {
        Self {
            kind,
            n_points: 200,
            n_steps: kind.default_steps(),
            seed,
        }
    }

    fn stream(&self, t: usize, point: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((self.kind.tag() << 56) | ((t as u64 & 0xFF_FFFF) << 32) | (point & 0xFFFF_FFFF));
        rng
    }

    /// Raw (unnormalized) dataset with component labels `0, 1, 2`.
    pub fn generate(&self) -> DatasetSeries {
        let n = self.n_points;
        let mut membership: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let mut means: Vec<[f64; 2]> = match self.kind {
            ScenarioKind::Separated => alloc::vec![[-4.0, 0.0], [4.0, 0.0]],
            _ => alloc::vec![[-3.0, -3.0], [3.0, 3.0], [-3.0, -3.0]],
        };
        let mut features = Vec::with_capacity(self.n_steps);
        let mut labels = Vec::with_capacity(self.n_steps);
        for t in 0..self.n_steps {
            let sd = match self.kind {
                ScenarioKind::Separated if t >= WIDEN_STEP => libm::sqrt(0.3),
                ScenarioKind::Separated => libm::sqrt(0.1),
                _ => 1.0,
            };
            match self.kind {
                ScenarioKind::Separated if t > 0 => {
                    for (c, mean) in means.iter_mut().enumerate() {
                        let mut rng = self.stream(t, 0xFFFF_FFFF - c as u64);
                        mean[0] += if rng.random::<bool>() { 0.1 } else { -0.1 };
                    }
                }
                ScenarioKind::Separated => {}
                _ if DRIFT_STEPS.contains(&t) => {
                    means[0][0] += 0.4;
                    means[0][1] += 0.4;
                }
                _ => {}
            }
            let switching = SWITCH_STEPS.contains(&t);
            let mut row = Vec::with_capacity(n);
            for (i, comp) in membership.iter_mut().enumerate() {
                let mut rng = self.stream(t, i as u64);
                if switching && *comp == 1 {
                    let u: f64 = rng.random();
                    if u < 0.25 {
                        match self.kind {
                            ScenarioKind::ClusterChange => *comp = 0,
                            ScenarioKind::ThirdCluster => *comp = 2,
                            _ => {}
                        }
                    }
                }
                let m = means[*comp];
                let z0: f64 = rng.sample(StandardNormal);
                let z1: f64 = rng.sample(StandardNormal);
                row.push(Some(alloc::vec![m[0] + sd * z0, m[1] + sd * z1]));
            }
            features.push(row);
            labels.push(membership.iter().map(|&c| Some(c as i64)).collect());
        }
        let ids = (0..n).map(|i| format!("p{i:03}")).collect();
        DatasetSeries::new(ids, features, Some(labels)).expect("generated data satisfies dataset invariants")
    }
}

pub fn gen_separated(seed: u64) -> DatasetSeries {
    GaussianScenario::new(ScenarioKind::Separated, seed).generate()
}

pub fn gen_colliding(seed: u64) -> DatasetSeries {
    GaussianScenario::new(ScenarioKind::Colliding, seed).generate()
}

pub fn gen_cluster_change(seed: u64) -> DatasetSeries {
    GaussianScenario::new(ScenarioKind::ClusterChange, seed).generate()
}

pub fn gen_third_cluster(seed: u64) -> DatasetSeries {
    GaussianScenario::new(ScenarioKind::ThirdCluster, seed).generate()
}

/// Standardizes each feature over all points and time steps.
pub fn normalize_synthetic(ds: &DatasetSeries) -> Result<DatasetSeries> {
    normalize_global(ds)
}
