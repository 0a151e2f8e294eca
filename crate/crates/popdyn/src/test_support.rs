//! Shared helpers for unit tests: seeded random games and simplex points.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::game::GameSpec;

pub fn random_simplex_points(k: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / sum).collect()
        })
        .collect()
}

/// Random n-type game on the full action set {1..k} with affine utilities
/// drawn uniformly from [−1, 1] and a random simplex alpha.
pub fn random_affine_game(k: usize, n_types: usize, seed: u64) -> GameSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9a7e_11d5);
    let raw: Vec<f64> = (0..n_types).map(|_| rng.random::<f64>() + 0.05).collect();
    let sum: f64 = raw.iter().sum();
    let mut alpha: Vec<f64> = raw.into_iter().map(|x| x / sum).collect();
    let correction: f64 = 1.0 - alpha.iter().sum::<f64>();
    alpha[0] += correction;
    let u: Vec<Vec<Vec<f64>>> = (0..n_types)
        .map(|_| {
            (0..k)
                .map(|_| (0..k).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect()
        })
        .collect();
    let d: Vec<Vec<f64>> = (0..n_types)
        .map(|_| (0..k).map(|_| rng.random_range(-0.5..0.5)).collect())
        .collect();
    GameSpec::new(
        (0..n_types).map(|t| format!("t{t}")).collect(),
        alpha,
        vec![(1..=k).collect(); n_types],
        u,
        d,
    )
    .unwrap()
}
