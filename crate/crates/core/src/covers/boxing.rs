use rayon::prelude::*;

use super::check::{certify, CoverRequirements, DensityBand};
use super::cz::cz_decomposition;
use super::five_r::greedy_select;
use super::{detail, Ball, BallCover, CoverAlgorithm};
use crate::error::{check_theta, Error, Result};
use crate::functionals::fractional_perimeter;
use crate::pointset::PointSet;
use crate::space::MetricMeasureSpace;
use crate::sum::NeumaierSum;

/// `(α_x, R_x)` for a point `x ∈ U` and density level `gamma`.
///
/// `α_x` is the largest distance from `x` at which the open ball has density
/// of `U` at least `gamma`. `R_x` is the next distance when it is at most
/// `2α_x` and the ball of half that radius still has density at least
/// `gamma`; otherwise `R_x = 2α_x`. Every open ball of radius `≥ R_x` about
/// `x` has density below `gamma`.
pub fn density_radius(space: &MetricMeasureSpace, u: &PointSet, x: usize, gamma: f64) -> (f64, f64) {
    let row = space.row(x);
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
    // (distance, open-ball density) at each distinct positive distance
    let mut levels: Vec<(f64, f64)> = Vec::new();
    let mut all = NeumaierSum::new();
    let mut inside = NeumaierSum::new();
    let mut k = 0;
    while k < order.len() {
        let d = row[order[k]];
        if d > 0.0 {
            levels.push((d, inside.value() / all.value()));
        }
        while k < order.len() && row[order[k]] == d {
            let y = order[k];
            all.add(space.weight(y));
            if u.contains(y) {
                inside.add(space.weight(y));
            }
            k += 1;
        }
    }
    let last = levels
        .iter()
        .rposition(|&(_, dens)| dens >= gamma)
        .expect("the first level is the center alone, which lies in U and gamma <= 1");
    let alpha = levels[last].0;
    let fallback = 2.0 * alpha;
    let radius = match levels.get(last + 1) {
        Some(&(next, _)) if next <= fallback => {
            let half = space.ball_unchecked(x, 0.5 * next);
            if half.intersection_mass(u, space.weights()) >= gamma * half.mass() {
                next
            } else {
                fallback
            }
        }
        _ => fallback,
    };
    (alpha, radius)
}

/// Disjoint balls `B(x_i, r_i)` with `U ⊆ ∪ B(x_i, 5τ r_i)` and density of `U`
/// in `[1/(2C_mu), 1/2)`, built from the per-point radii `R_x` by a 5r
/// selection of `{B(x, τR_x)}`.
pub fn boxing_cover(
    space: &MetricMeasureSpace,
    u: &PointSet,
    theta: f64,
    tau: f64,
    c_mu: f64,
) -> Result<BallCover> {
    check_theta(theta)?;
    if !(tau >= 1.0 && tau.is_finite()) {
        return Err(Error::precondition("inflation factor at least 1", format!("tau = {tau}")));
    }
    if u.is_empty() {
        return Err(Error::EmptySet("set to be boxed"));
    }
    if u.mass() >= 0.5 * space.total_mass() {
        return Err(Error::precondition(
            "boxed set carries less than half the total mass",
            format!("mass {} vs total {}", u.mass(), space.total_mass()),
        ));
    }
    let points = u.indices();
    let radii: Vec<(f64, f64)> = points.par_iter().map(|&x| density_radius(space, u, x, 0.5)).collect();
    let inflated: Vec<Ball> = points
        .iter()
        .zip(&radii)
        .map(|(&x, &(_, r))| Ball::new(x, tau * r))
        .collect();
    let balls: Vec<Ball> = greedy_select(space, &inflated)
        .into_iter()
        .map(|b| Ball::new(b.center, b.radius / tau))
        .collect();
    let perimeter = fractional_perimeter(space, u, &PointSet::full(space), theta)?.value;
    let mut details = serde_json::Map::new();
    detail(&mut details, "theta", theta);
    detail(&mut details, "tau", tau);
    detail(&mut details, "c_mu", c_mu);
    detail(&mut details, "perimeter", perimeter);

    let mut req = CoverRequirements::new(5.0 * tau);
    req.disjoint_scale = tau;
    req.target = Some(u.clone());
    req.density = Some(DensityBand {
        set: u.clone(),
        lo: 1.0 / (2.0 * c_mu),
        hi: 0.5,
        hi_strict: true,
    });
    req.ratio = Some((theta, theta * (1.0 - theta) * perimeter));
    let certificate = certify(space, &balls, &[], &req);
    Ok(BallCover {
        algorithm: CoverAlgorithm::Boxing,
        balls,
        floor_balls: Vec::new(),
        inflation: 5.0 * tau,
        flags: Default::default(),
        certificate,
        details,
    })
}

/// The dyadic decomposition of `U` inside `B0` at level `kappa`, certified
/// against `(1−θ) P_θ(U ∩ B0, B0)`.
pub fn local_boxing_cover(
    space: &MetricMeasureSpace,
    b0: Ball,
    u: &PointSet,
    kappa: f64,
    theta: f64,
    c_mu: f64,
) -> Result<BallCover> {
    check_theta(theta)?;
    let mut cover = cz_decomposition(space, b0, u, kappa, c_mu)?;
    let ball0 = space.ball_unchecked(b0.center, b0.radius);
    let local = u.intersection(&ball0, space);
    let perimeter = fractional_perimeter(space, &local, &ball0, theta)?.value;
    detail(&mut cover.details, "theta", theta);
    detail(&mut cover.details, "perimeter", perimeter);

    let mut req = CoverRequirements::new(5.0);
    req.target = Some(local);
    req.density = Some(DensityBand {
        set: u.clone(),
        lo: kappa / (c_mu * c_mu),
        hi: kappa,
        hi_strict: false,
    });
    req.dyadic_base = Some(b0.radius);
    req.container = Some(b0);
    req.ratio = Some((theta, (1.0 - theta) * perimeter));
    cover.certificate = certify(space, &cover.balls, &cover.floor_balls, &req);
    cover.algorithm = CoverAlgorithm::LocalBoxing;
    Ok(cover)
}
