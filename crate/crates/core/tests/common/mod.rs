#![allow(dead_code)]

use eap_core::dataseries::Observation;
use eap_core::{build_similarity, set_preferences, DatasetSeries, PreferenceMode, SimilarityTensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform points in a box; each point is dropped at a step with probability
/// `gap` but kept at step 0, so every point is active somewhere.
pub fn random_dataset(seed: u64, n: usize, steps: usize, dim: usize, gap: f64) -> DatasetSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for t in 0..steps {
        for i in 0..n {
            if t > 0 && rng.random::<f64>() < gap {
                continue;
            }
            rows.push(Observation {
                point_id: format!("p{i}"),
                t,
                features: (0..dim).map(|_| Some(rng.random_range(-5.0..5.0))).collect(),
                label: Some((i % 3) as i64),
            });
        }
    }
    DatasetSeries::from_observations(rows).unwrap()
}

/// Well-separated groups, each a hub point with satellites spread around it
/// at radius 0.3 to 0.6, so the hub is the clear medoid.
pub fn blobs(seed: u64, sizes: &[usize]) -> DatasetSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut id = 0;
    for (c, &size) in sizes.iter().enumerate() {
        let centre = [20.0 * c as f64 + rng.random_range(-1.0..1.0), rng.random_range(-20.0..20.0)];
        let turn = rng.random_range(0.0..std::f64::consts::TAU);
        for k in 0..size {
            let offset = match k {
                0 => [0.0, 0.0],
                _ => {
                    let angle = turn + std::f64::consts::TAU * k as f64 / (size - 1) as f64 + rng.random_range(-0.3..0.3);
                    let radius = rng.random_range(0.3..0.6);
                    [radius * angle.cos(), radius * angle.sin()]
                }
            };
            rows.push(Observation {
                point_id: format!("p{id}"),
                t: 0,
                features: vec![Some(centre[0] + offset[0]), Some(centre[1] + offset[1])],
                label: Some(c as i64),
            });
            id += 1;
        }
    }
    DatasetSeries::from_observations(rows).unwrap()
}

pub fn similarities(ds: &DatasetSeries, mode: PreferenceMode) -> SimilarityTensor {
    set_preferences(build_similarity(ds), mode).unwrap()
}
