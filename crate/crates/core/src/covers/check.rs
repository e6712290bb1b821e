//! Independent certificate checker. Works only from raw ball queries and the
//! stated requirements; nothing computed by a constructor is trusted.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Ball;
use crate::pointset::PointSet;
use crate::space::MetricMeasureSpace;
use crate::sum::compensated_sum;

const RTOL: f64 = 1e-12;

/// Required range for `μ(B ∩ set)/μ(B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityBand {
    pub set: PointSet,
    pub lo: f64,
    pub hi: f64,
    /// When true the upper bound is strict.
    pub hi_strict: bool,
}

/// What a cover must satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverRequirements {
    /// Balls `B(x, s·r)` must be pairwise disjoint for this `s`.
    pub disjoint_scale: f64,
    /// Balls `B(x, c·r)` must cover `target` for this `c`.
    pub inflation: f64,
    pub target: Option<PointSet>,
    /// Each candidate must lie inside the inflation of some selected ball.
    pub candidates: Vec<Ball>,
    pub density: Option<DensityBand>,
    /// Radii must be `base · 2^{-N}` with `N ≥ 0`.
    pub dyadic_base: Option<f64>,
    /// Every ball must lie inside this one.
    pub container: Option<Ball>,
    /// Radii must lie in `[lo, hi]`.
    pub radius_band: Option<(f64, f64)>,
    /// `(θ, denominator)`: report `Σ μ(B_i)/r_i^θ` and its quotient by the denominator.
    pub ratio: Option<(f64, f64)>,
}

impl CoverRequirements {
    pub fn new(inflation: f64) -> Self {
        Self {
            disjoint_scale: 1.0,
            inflation,
            target: None,
            candidates: Vec::new(),
            density: None,
            dyadic_base: None,
            container: None,
            radius_band: None,
            ratio: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub disjoint: bool,
    pub covers_target: bool,
    /// Extreme densities over the non-floor balls, when a band was required.
    pub density_lo: Option<f64>,
    pub density_hi: Option<f64>,
    pub density_ok: Option<bool>,
    pub dyadic_ok: Option<bool>,
    pub contained_ok: Option<bool>,
    pub radius_ok: Option<bool>,
    pub ratio_sum: Option<f64>,
    #[serde(with = "crate::serde_float::option")]
    pub quotient: Option<f64>,
    /// `Σ μ(B)/r^θ` over floor balls, reported separately.
    pub floor_ratio_sum: Option<f64>,
    pub violations: Vec<String>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn members(space: &MetricMeasureSpace, b: &Ball) -> PointSet {
    PointSet::from_predicate(space, |y| space.d(b.center, y) < b.radius)
}

fn mass(space: &MetricMeasureSpace, set: &PointSet) -> f64 {
    compensated_sum(set.iter().map(|i| space.weight(i)))
}

/// Recomputes every certificate field for `balls ∪ floor_balls`.
pub fn certify(
    space: &MetricMeasureSpace,
    balls: &[Ball],
    floor_balls: &[Ball],
    req: &CoverRequirements,
) -> Certificate {
    let all: Vec<Ball> = balls.iter().chain(floor_balls).copied().collect();
    let mut violations = Vec::new();

    let shrunk: Vec<PointSet> = all
        .par_iter()
        .map(|b| members(space, &b.scaled(req.disjoint_scale)))
        .collect();
    let mut disjoint = true;
    for i in 0..shrunk.len() {
        for j in (i + 1)..shrunk.len() {
            if !shrunk[i].is_disjoint(&shrunk[j]) {
                disjoint = false;
                violations.push(format!(
                    "balls {i} and {j} (scaled by {}) intersect",
                    req.disjoint_scale
                ));
            }
        }
    }

    let inflated: Vec<PointSet> = all
        .par_iter()
        .map(|b| members(space, &b.scaled(req.inflation)))
        .collect();
    let mut covered = PointSet::empty(space);
    for s in &inflated {
        covered = covered.union(s, space);
    }
    let mut covers_target = true;
    if let Some(target) = &req.target {
        let missing = target.difference(&covered, space);
        if !missing.is_empty() {
            covers_target = false;
            violations.push(format!("{} target points are not covered: {:?}", missing.count(), missing.indices()));
        }
    }
    for (k, c) in req.candidates.iter().enumerate() {
        let m = members(space, c);
        if !inflated[..balls.len()].iter().any(|s| m.is_subset(s)) {
            covers_target = false;
            violations.push(format!("candidate {k} is not inside any inflated selected ball"));
        }
    }

    let (mut density_lo, mut density_hi, mut density_ok) = (None, None, None);
    if let Some(band) = &req.density {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut ok = true;
        for (k, b) in balls.iter().enumerate() {
            let m = members(space, b);
            let dens = mass(space, &m.intersection(&band.set, space)) / mass(space, &m);
            lo = lo.min(dens);
            hi = hi.max(dens);
            let below = dens < band.lo * (1.0 - RTOL);
            let above = if band.hi_strict { dens >= band.hi } else { dens > band.hi * (1.0 + RTOL) };
            if below || above {
                ok = false;
                violations.push(format!(
                    "ball {k} has density {dens} outside [{}, {}{}",
                    band.lo,
                    band.hi,
                    if band.hi_strict { ")" } else { "]" }
                ));
            }
        }
        if !balls.is_empty() {
            density_lo = Some(lo);
            density_hi = Some(hi);
        }
        density_ok = Some(ok);
    }

    let dyadic_ok = req.dyadic_base.map(|base| {
        let mut ok = true;
        for (k, b) in all.iter().enumerate() {
            let n = (base / b.radius).log2().round();
            if n < 0.0 || b.radius != base * 2f64.powi(-(n as i32)) {
                ok = false;
                violations.push(format!("ball {k} radius {} is not a dyadic fraction of {base}", b.radius));
            }
        }
        ok
    });

    let contained_ok = req.container.map(|c| {
        let outer = members(space, &c);
        let mut ok = true;
        for (k, b) in all.iter().enumerate() {
            if !members(space, b).is_subset(&outer) {
                ok = false;
                violations.push(format!("ball {k} is not contained in the enclosing ball"));
            }
        }
        ok
    });

    let radius_ok = req.radius_band.map(|(lo, hi)| {
        let mut ok = true;
        for (k, b) in balls.iter().enumerate() {
            if b.radius < lo * (1.0 - RTOL) || b.radius > hi * (1.0 + RTOL) {
                ok = false;
                violations.push(format!("ball {k} radius {} outside [{lo}, {hi}]", b.radius));
            }
        }
        ok
    });

    let (mut ratio_sum, mut quotient, mut floor_ratio_sum) = (None, None, None);
    if let Some((theta, denominator)) = req.ratio {
        let sum = |bs: &[Ball]| compensated_sum(bs.iter().map(|b| mass(space, &members(space, b)) / b.radius.powf(theta)));
        let s = sum(balls);
        ratio_sum = Some(s);
        quotient = Some(if denominator > 0.0 {
            s / denominator
        } else if s == 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
        if !floor_balls.is_empty() {
            floor_ratio_sum = Some(sum(floor_balls));
        }
    }

    Certificate {
        disjoint,
        covers_target,
        density_lo,
        density_hi,
        density_ok,
        dyadic_ok,
        contained_ok,
        radius_ok,
        ratio_sum,
        quotient,
        floor_ratio_sum,
        violations,
    }
}
