//! Shared helpers for the integration and acceptance tests.
#![allow(dead_code)]

use menger::DiscreteMeasure;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random cloud with coordinates in [-1, 1]^m and weights in [0.5, 1.5].
pub fn random_cloud(rng: &mut ChaCha8Rng, m: usize, n: usize, count: usize) -> DiscreteMeasure {
    let coords: Vec<f64> = (0..count * m)
        .map(|_| 2.0 * rng.random::<f64>() - 1.0)
        .collect();
    let weights: Vec<f64> = (0..count).map(|_| 0.5 + rng.random::<f64>()).collect();
    DiscreteMeasure::new(m, n, coords, weights).expect("valid cloud")
}

pub fn random_tuple(rng: &mut ChaCha8Rng, m: usize, arity: usize) -> Vec<Vec<f64>> {
    (0..arity)
        .map(|_| (0..m).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect())
        .collect()
}

pub fn median(mut values: Vec<f64>) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn rel_gap(a: f64, b: f64) -> f64 {
    let denom = a.abs().max(b.abs());
    if denom == 0.0 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}
