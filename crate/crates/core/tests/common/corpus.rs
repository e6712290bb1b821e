//! The fixture corpus shared by the acceptance run and the fixture
//! regeneration, plus the fixture file format.

use std::path::PathBuf;

use fracperim::covers::Ball;
use fracperim::generators::{grid, weighted_space};
use fracperim::lab::{report, FamilySpec, InequalityKind, ReportParams, Witness};
use fracperim::{MetricMeasureSpace, PointSet};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const FAMILY_SEED: u64 = 42;

pub fn family() -> FamilySpec {
    FamilySpec::default_with_seed(FAMILY_SEED)
}

pub fn spaces() -> Vec<(&'static str, MetricMeasureSpace)> {
    let square = grid(2, 17).unwrap();
    let weighted = weighted_space(&square, 0.5, square.len() / 2).unwrap();
    vec![("grid(1,129)", grid(1, 129).unwrap()), ("grid(2,17)", square), ("weighted(grid(2,17),0.5)", weighted)]
}

/// Five set families on a fixture space.
pub fn sets(s: &MetricMeasureSpace) -> Vec<(&'static str, PointSet)> {
    let n = s.len();
    let diam = s.diameter();
    let x: Vec<f64> = s.coords().unwrap().iter().map(|c| c[0]).collect();
    let mut r = super::rng(7);
    let coin: Vec<bool> = (0..n).map(|_| r.gen_bool(0.25)).collect();
    let blobs = s.ball(n / 4, diam / 8.0).unwrap().union(&s.ball(3 * n / 4, diam / 8.0).unwrap(), s);
    vec![
        ("halfspace", PointSet::from_predicate(s, |i| x[i] < 0.3)),
        ("center_ball", s.ball(n / 2, diam / 4.0).unwrap()),
        ("corner_ball", s.ball(0, diam / 3.0).unwrap()),
        ("random", PointSet::from_predicate(s, |i| coin[i])),
        ("two_blobs", blobs),
    ]
}

/// The sweep ball family: every point as center (or 16 strided ones) times
/// radii `2^{-m}·diam` above the smallest distance.
pub fn ball_family(s: &MetricMeasureSpace) -> Vec<Ball> {
    let n = s.len();
    let centers: Vec<usize> = if n <= 16 { (0..n).collect() } else { (0..16).map(|i| i * n / 16).collect() };
    let mut radii = Vec::new();
    let mut r = s.diameter();
    while r > s.min_distance() {
        radii.push(r);
        r *= 0.5;
    }
    centers.iter().flat_map(|&c| radii.iter().map(move |&r| Ball::new(c, r))).collect()
}

/// Largest single-instance ratio of `kind` over the family (times the ball
/// family for local kinds), one report at a time.
pub fn max_ratio_by_reports(s: &MetricMeasureSpace, kind: InequalityKind, theta: f64, q: f64, rescale: bool) -> f64 {
    let members = family().members(s).unwrap();
    let balls = if kind.takes_ball() { ball_family(s) } else { vec![] };
    let mut best = f64::NEG_INFINITY;
    for m in &members {
        let w = if kind.takes_function() {
            Witness::function(m.id.clone(), m.to_function(s))
        } else {
            Witness::set(m.id.clone(), m.to_set(s))
        };
        let mut params = ReportParams::new(theta, q);
        params.rescale = rescale;
        let balls: Vec<Option<Ball>> = if balls.is_empty() { vec![None] } else { balls.iter().copied().map(Some).collect() };
        for b in balls {
            params.ball = b;
            match report(s, kind, &params, &w) {
                Ok(r) => best = best.max(r.ratio),
                Err(e) if e.is_precondition() => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
    best
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Curve {
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaugeFixture {
    pub space: String,
    pub theta: f64,
    pub q: f64,
    pub poincare: f64,
    pub rel_iso: f64,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fixtures {
    /// `(1−θ) P_θ(left half) / graph perimeter` on grid(1,257) from the oracle.
    pub scaling_curve: Curve,
    pub scaling_bracket: (f64, f64),
    /// Rescaled Poincaré max-ratio curve on grid(2,33) from single reports.
    pub poincare_curve: Curve,
    pub poincare_spread: f64,
    /// Per-θ boxing constants on grid(1,257) and grid(2,33).
    pub boxing_line: Curve,
    pub boxing_square: Curve,
    pub boxing_constant: f64,
    pub gauges: Vec<GaugeFixture>,
    /// Required factor by which the negative controls exceed the grid.
    pub control_theta: f64,
    pub control_q: f64,
    pub control_threshold: f64,
}

pub fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/acceptance.json")
}

pub fn load() -> Fixtures {
    let text = std::fs::read_to_string(fixture_path()).expect("fixtures present; regenerate with --ignored");
    serde_json::from_str(&text).unwrap()
}

pub fn acceptance_thetas() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

pub fn scaling_thetas() -> Vec<f64> {
    (0..10).map(|k| 0.5 + 0.05 * k as f64).collect()
}

/// Spaces and grid on which the equivalence gauges are pinned.
pub fn gauge_cases() -> Vec<(&'static str, MetricMeasureSpace, f64, f64)> {
    let mut out = Vec::new();
    for (name, dim, n) in [("grid(1,65)", 1, 65), ("grid(2,17)", 2, 17)] {
        for theta in [0.5, 0.9] {
            out.push((name, grid(dim, n).unwrap(), theta, 1.0));
        }
    }
    out
}

pub fn left_half(s: &MetricMeasureSpace) -> PointSet {
    PointSet::from_predicate(s, |i| s.coords().unwrap()[i][0] < 0.5)
}
