use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Witness;
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::space::MetricMeasureSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `{x_a < t}` per coordinate axis (distance sublevels from point 0 without coordinates).
    Halfspaces,
    /// Metric balls as sets.
    MetricBalls,
    /// Sublevel sets of `d(·,p) − d(·,p')` and of `min(d(·,p), d(·,p'))`.
    DistanceSublevels,
    /// `min_j (v_j + d(·, p_j))` with random anchors and offsets.
    RandomLipschitz,
    /// Low-frequency cosine profiles.
    LowFrequency,
    /// The constant function 1.
    Constants,
}

impl Family {
    pub const DEFAULT: [Family; 5] = [
        Family::Halfspaces,
        Family::MetricBalls,
        Family::DistanceSublevels,
        Family::RandomLipschitz,
        Family::LowFrequency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Halfspaces => "halfspaces",
            Family::MetricBalls => "metric_balls",
            Family::DistanceSublevels => "distance_sublevels",
            Family::RandomLipschitz => "random_lipschitz",
            Family::LowFrequency => "low_frequency",
            Family::Constants => "constants",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [
            Family::Halfspaces,
            Family::MetricBalls,
            Family::DistanceSublevels,
            Family::RandomLipschitz,
            Family::LowFrequency,
            Family::Constants,
        ]
        .into_iter()
        .find(|f| f.name() == s)
        .ok_or_else(|| Error::InvalidSpace(format!("unknown family {s:?}")))
    }
}

/// A deterministic family of test sets and functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub families: Vec<Family>,
    pub seed: u64,
    /// Number of random Lipschitz functions.
    pub random_members: usize,
}

impl FamilySpec {
    pub fn new(families: Vec<Family>, seed: u64) -> Self {
        Self { families, seed, random_members: 4 }
    }

    pub fn default_with_seed(seed: u64) -> Self {
        Self::new(Family::DEFAULT.to_vec(), seed)
    }

    pub fn members(&self, space: &MetricMeasureSpace) -> Result<Vec<Witness>> {
        if self.families.is_empty() {
            return Err(Error::precondition("nonempty test family", "no families selected"));
        }
        let mut out = Vec::new();
        for &f in &self.families {
            match f {
                Family::Halfspaces => halfspaces(space, &mut out),
                Family::MetricBalls => metric_balls(space, &mut out),
                Family::DistanceSublevels => sublevels(space, &mut out),
                Family::RandomLipschitz => lipschitz(space, self.seed, self.random_members, &mut out),
                Family::LowFrequency => low_frequency(space, &mut out),
                Family::Constants => out.push(Witness::function("constant", vec![1.0; space.len()])),
            }
        }
        Ok(out)
    }
}

fn coordinate_ranges(coords: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let dim = coords.first().map_or(0, Vec::len);
    (0..dim)
        .map(|a| {
            coords
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[a]), hi.max(p[a])))
        })
        .collect()
}

fn halfspaces(space: &MetricMeasureSpace, out: &mut Vec<Witness>) {
    let fractions = [0.25, 0.5, 0.75];
    match space.coords() {
        Some(coords) => {
            let ranges = coordinate_ranges(coords);
            for (a, &(lo, hi)) in ranges.iter().enumerate() {
                for t in fractions {
                    let cut = lo + t * (hi - lo);
                    out.push(Witness::set(
                        format!("halfspace:{a}:{t}"),
                        PointSet::from_predicate(space, |i| coords[i][a] < cut),
                    ));
                }
            }
            if ranges.len() >= 2 {
                let mid: f64 = ranges.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).sum();
                out.push(Witness::set(
                    "halfspace:diagonal",
                    PointSet::from_predicate(space, |i| coords[i].iter().sum::<f64>() < mid),
                ));
            }
        }
        None => {
            let row = space.row(0);
            let diam = space.diameter();
            for t in fractions {
                out.push(Witness::set(
                    format!("halfspace:from0:{t}"),
                    PointSet::from_predicate(space, |i| row[i] < t * diam),
                ));
            }
        }
    }
}

fn metric_balls(space: &MetricMeasureSpace, out: &mut Vec<Witness>) {
    let n = space.len();
    let mut centers = vec![0, n / 2, n - 1];
    centers.dedup();
    let diam = space.diameter();
    for c in centers {
        for t in [0.125, 0.25, 0.5] {
            let r = t * diam;
            out.push(Witness::set(format!("ball:{c}:{r}"), space.ball_unchecked(c, r)));
        }
    }
}

fn farthest_from(space: &MetricMeasureSpace, p: usize) -> usize {
    let row = space.row(p);
    let mut best = p;
    for (i, &d) in row.iter().enumerate() {
        if d > row[best] {
            best = i;
        }
    }
    best
}

fn sublevels(space: &MetricMeasureSpace, out: &mut Vec<Witness>) {
    let p = 0;
    let p2 = farthest_from(space, p);
    let r1 = space.row(p);
    let r2 = space.row(p2);
    let diam = space.diameter();
    for s in [-0.5, 0.0, 0.5] {
        out.push(Witness::set(
            format!("sublevel:difference:{s}"),
            PointSet::from_predicate(space, |i| r1[i] - r2[i] < s * diam),
        ));
    }
    out.push(Witness::set(
        "sublevel:nearest:0.25",
        PointSet::from_predicate(space, |i| r1[i].min(r2[i]) < 0.25 * diam),
    ));
}

fn lipschitz(space: &MetricMeasureSpace, seed: u64, count: usize, out: &mut Vec<Witness>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.len();
    let diam = space.diameter();
    for k in 0..count {
        let anchors: Vec<(usize, f64)> = (0..4).map(|_| (rng.gen_range(0..n), rng.gen_range(0.0..0.5) * diam)).collect();
        let rows: Vec<_> = anchors.iter().map(|&(p, _)| space.row(p)).collect();
        let u = (0..n)
            .map(|i| {
                anchors
                    .iter()
                    .zip(&rows)
                    .map(|(&(_, v), row)| v + row[i])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        out.push(Witness::function(format!("lipschitz:{seed}:{k}"), u));
    }
}

fn low_frequency(space: &MetricMeasureSpace, out: &mut Vec<Witness>) {
    use std::f64::consts::PI;
    match space.coords() {
        Some(coords) => {
            let ranges = coordinate_ranges(coords);
            let unit = |i: usize, a: usize| {
                let (lo, hi) = ranges[a];
                if hi > lo {
                    (coords[i][a] - lo) / (hi - lo)
                } else {
                    0.0
                }
            };
            for a in 0..ranges.len() {
                for m in [1.0, 2.0] {
                    out.push(Witness::function(
                        format!("cosine:{a}:{m}"),
                        (0..space.len()).map(|i| (PI * m * unit(i, a)).cos()).collect(),
                    ));
                }
            }
            if ranges.len() >= 2 {
                out.push(Witness::function(
                    "cosine:product",
                    (0..space.len()).map(|i| (PI * unit(i, 0)).cos() * (PI * unit(i, 1)).cos()).collect(),
                ));
            }
        }
        None => {
            let row = space.row(0);
            let diam = space.diameter();
            for m in [1.0, 2.0] {
                out.push(Witness::function(
                    format!("cosine:from0:{m}"),
                    (0..space.len()).map(|i| (PI * m * row[i] / diam).cos()).collect(),
                ));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{grid, random_graph};

    #[test]
    fn default_family_is_deterministic() {
        let g = grid(2, 9).unwrap();
        let spec = FamilySpec::default_with_seed(42);
        let a = spec.members(&g).unwrap();
        let b = spec.members(&g).unwrap();
        assert_eq!(a, b);
        assert!(a.len() >= 20);
        let other = FamilySpec::default_with_seed(43).members(&g).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn families_without_coordinates() {
        let g = random_graph(30, 10, 3).unwrap();
        let m = FamilySpec::default_with_seed(1).members(&g).unwrap();
        assert!(!m.is_empty());
        assert!(FamilySpec::new(vec![], 1).members(&g).is_err());
    }
}
