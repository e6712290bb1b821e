//! Mollifier kernels `ρ_θ(x,y) = (1−θ) d^{1−θ} / μ(B(x,d))` and their
//! admissibility checks: the dyadic-annulus sandwich and the decay of the
//! far-field mass.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_theta, Error, Result};
use crate::space::MetricMeasureSpace;
use crate::sum::NeumaierSum;

const SANDWICH_RTOL: f64 = 1e-12;

pub fn rho_kernel(space: &MetricMeasureSpace, theta: f64, x: usize, y: usize) -> Result<f64> {
    check_theta(theta)?;
    let d = space.distance(x, y)?;
    if d == 0.0 {
        return Err(Error::precondition("kernel needs distinct points", format!("x = y = {x}")));
    }
    Ok((1.0 - theta) * d.powf(1.0 - theta) / space.ball_mass(x, d))
}

/// A pair at which the sandwich bound fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichViolation {
    pub x: usize,
    pub y: usize,
    pub j: i32,
    pub lower: f64,
    pub rho: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub theta: f64,
    pub c_mu: f64,
    pub pairs_checked: usize,
    /// Smallest `ρ / lower` and largest `ρ / upper` over the checked pairs.
    pub min_lower_slack: f64,
    pub max_upper_ratio: f64,
    pub violations: Vec<SandwichViolation>,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For every pair with `0 < d(x,y) ≤ 1`, with `j ≥ 1` such that
/// `2^{-j} < d ≤ 2^{-j+1}` and `V = μ(B(x, 2^{-j+1}))`, checks
/// `(1−θ) 2^{-j(1−θ)} / V ≤ ρ(x,y) ≤ C_mu (1−θ) 2^{(-j+1)(1−θ)} / V`.
pub fn rho_sandwich_check(space: &MetricMeasureSpace, theta: f64, c_mu: f64) -> Result<SandwichReport> {
    check_theta(theta)?;
    let n = space.len();
    let a = 1.0 - theta;
    let per_row: Vec<(usize, f64, f64, Vec<SandwichViolation>)> = (0..n)
        .into_par_iter()
        .map(|x| {
            let row = space.row(x);
            let mut checked = 0;
            let mut lo_slack = f64::INFINITY;
            let mut hi_ratio: f64 = 0.0;
            let mut bad = Vec::new();
            for (y, &d) in row.iter().enumerate() {
                if d == 0.0 || d > 1.0 {
                    continue;
                }
                let mut j = (-d.log2()).floor() as i32 + 1;
                // Guard the rounding of log2 at exact powers of two.
                while d > 2f64.powi(-j + 1) {
                    j -= 1;
                }
                while d <= 2f64.powi(-j) {
                    j += 1;
                }
                let outer = 2f64.powi(-j + 1);
                let v = space.ball_mass(x, outer);
                let lower = a * 2f64.powf(-(j as f64) * a) / v;
                let upper = c_mu * a * outer.powf(a) / v;
                let rho = a * d.powf(a) / space.ball_mass_at(x, y);
                checked += 1;
                lo_slack = lo_slack.min(rho / lower);
                hi_ratio = hi_ratio.max(rho / upper);
                if rho < lower * (1.0 - SANDWICH_RTOL) || rho > upper * (1.0 + SANDWICH_RTOL) {
                    bad.push(SandwichViolation { x, y, j, lower, rho, upper });
                }
            }
            (checked, lo_slack, hi_ratio, bad)
        })
        .collect();
    let mut report = SandwichReport {
        theta,
        c_mu,
        pairs_checked: 0,
        min_lower_slack: f64::INFINITY,
        max_upper_ratio: 0.0,
        violations: Vec::new(),
    };
    for (c, lo, hi, bad) in per_row {
        report.pairs_checked += c;
        report.min_lower_slack = report.min_lower_slack.min(lo);
        report.max_upper_ratio = report.max_upper_ratio.max(hi);
        report.violations.extend(bad);
    }
    Ok(report)
}

/// `sup_y Σ_{x: d ≥ δ} ρ(x,y)/d · μ_x + sup_x Σ_{y: d ≥ δ} ρ(x,y)/d · μ_y`.
pub fn rho_tail(space: &MetricMeasureSpace, theta: f64, delta: f64) -> Result<f64> {
    check_theta(theta)?;
    if !(delta > 0.0) {
        return Err(Error::NonPositiveRadius(delta));
    }
    let n = space.len();
    let w = space.weights();
    let a = 1.0 - theta;
    // ρ(x,y)/d = (1−θ) / (d^θ μ(B(x,d))); the second sup fixes the kernel's center.
    let by_center: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let row = space.row(x);
            let mut acc = NeumaierSum::new();
            for y in 0..n {
                let d = row[y];
                if d >= delta {
                    acc.add(a / (d.powf(theta) * space.ball_mass_at(x, y)) * w[y]);
                }
            }
            acc.value()
        })
        .collect();
    let by_other: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|y| {
            let row = space.row(y);
            let mut acc = NeumaierSum::new();
            for x in 0..n {
                let d = row[x];
                if d >= delta {
                    acc.add(a / (d.powf(theta) * space.ball_mass_at(x, y)) * w[x]);
                }
            }
            acc.value()
        })
        .collect();
    let sup = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    Ok(sup(&by_other) + sup(&by_center))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_examples() {
        let s = MetricMeasureSpace::from_matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0; 2]).unwrap();
        assert_eq!(rho_kernel(&s, 0.5, 0, 1).unwrap(), 0.5);
        assert!(rho_kernel(&s, 0.5, 1, 1).is_err());
        assert_eq!(rho_tail(&s, 0.5, 1.5).unwrap(), 0.0);
        assert!(rho_tail(&s, 0.5, 0.0).is_err());
    }

    #[test]
    fn sandwich_holds_on_a_grid() {
        let g = crate::generators::grid(1, 33).unwrap();
        let c = crate::constants::doubling_constant(&g).unwrap();
        for theta in [0.3, 0.9] {
            let r = rho_sandwich_check(&g, theta, c).unwrap();
            assert!(r.passed(), "{:?}", r.violations.first());
            assert!(r.pairs_checked > 0);
        }
    }

    #[test]
    fn tail_decays_near_one() {
        let g = crate::generators::grid(1, 129).unwrap();
        assert!(rho_tail(&g, 0.99, 0.25).unwrap() < rho_tail(&g, 0.5, 0.25).unwrap());
    }
}
