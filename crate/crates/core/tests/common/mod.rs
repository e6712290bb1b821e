#![allow(dead_code)]

pub mod corpus;
pub mod oracle;

use fracperim::generators::{random_euclidean, random_graph};
use fracperim::{MetricMeasureSpace, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_close(a: f64, b: f64, rtol: f64) -> bool {
    a == b || (a - b).abs() <= rtol * a.abs().max(b.abs())
}

/// A random space of `2..=max_n` points: Euclidean, random graph, or either
/// with random weights in `[0.5, 2)`.
pub fn random_space(rng: &mut ChaCha8Rng, max_n: usize) -> MetricMeasureSpace {
    let n = rng.gen_range(2..=max_n);
    let seed = rng.gen();
    let base = if rng.gen_bool(0.5) {
        random_euclidean(n, seed).unwrap()
    } else {
        random_graph(n, rng.gen_range(0..n), seed).unwrap()
    };
    if rng.gen_bool(0.5) {
        let w = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        base.with_weights(w).unwrap()
    } else {
        base
    }
}

pub fn random_set(rng: &mut ChaCha8Rng, s: &MetricMeasureSpace, p: f64) -> PointSet {
    let keep: Vec<bool> = (0..s.len()).map(|_| rng.gen_bool(p)).collect();
    PointSet::from_predicate(s, |i| keep[i])
}

/// Random function: either a few repeated levels or continuous values.
pub fn random_function(rng: &mut ChaCha8Rng, s: &MetricMeasureSpace) -> Vec<f64> {
    if rng.gen_bool(0.5) {
        let levels = rng.gen_range(1..6);
        (0..s.len()).map(|_| rng.gen_range(0..levels) as f64 * 0.5).collect()
    } else {
        (0..s.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }
}

pub fn random_theta(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.02..0.98)
}
