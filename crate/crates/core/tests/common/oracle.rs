//! Direct reference formulas: every pair, every ball mass recomputed by a
//! scan over all points. Slow and obviously correct.

use fracperim::{MetricMeasureSpace, PointSet};

fn ball_mass(s: &MetricMeasureSpace, x: usize, r: f64) -> f64 {
    let mut m = 0.0;
    for z in 0..s.len() {
        if s.d(x, z) < r {
            m += s.weight(z);
        }
    }
    m
}

pub fn perimeter(s: &MetricMeasureSpace, e: &PointSet, omega: &PointSet, theta: f64) -> f64 {
    let mut total = 0.0;
    for x in 0..s.len() {
        for y in 0..s.len() {
            if !(omega.contains(x) && omega.contains(y) && e.contains(x) && !e.contains(y)) {
                continue;
            }
            let d = s.d(x, y);
            let k = 2.0 / (d.powf(theta) * (ball_mass(s, x, d) + ball_mass(s, y, d)));
            total += k * s.weight(x) * s.weight(y);
        }
    }
    total
}

pub fn energy(s: &MetricMeasureSpace, u: &[f64], omega: &PointSet, theta: f64, symmetric: bool) -> f64 {
    let mut total = 0.0;
    for x in 0..s.len() {
        for y in 0..s.len() {
            if x == y || !omega.contains(x) || !omega.contains(y) {
                continue;
            }
            let d = s.d(x, y);
            let mass = if symmetric {
                ball_mass(s, x, d) + ball_mass(s, y, d)
            } else {
                ball_mass(s, x, d)
            };
            total += (u[x] - u[y]).abs() * s.weight(x) * s.weight(y) / (d.powf(theta) * mass);
        }
    }
    total
}
