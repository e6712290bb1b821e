use super::check::{certify, CoverRequirements, DensityBand};
use super::five_r::greedy_select;
use super::{detail, Ball, BallCover, CoverAlgorithm, CoverFlags};
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::space::MetricMeasureSpace;

/// Dyadic ball decomposition of `E` inside `B0` at density level `lambda`.
///
/// Starting from `B0`, every bad ball (density of `E` below `λ/C_mu²`) is
/// replaced by all balls of half the radius contained in it; good balls are
/// kept. The descent stops once radii drop below the smallest positive
/// distance. A 5r selection of the good balls is returned; points of
/// `B0 ∩ E` that no good ball captured get singleton-scale floor balls.
pub fn cz_decomposition(
    space: &MetricMeasureSpace,
    b0: Ball,
    e: &PointSet,
    lambda: f64,
    c_mu: f64,
) -> Result<BallCover> {
    if !space.is_geodesic() {
        return Err(Error::NotGeodesic);
    }
    b0.validate(space)?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::precondition(
            "density level strictly between 0 and 1",
            format!("lambda = {lambda}"),
        ));
    }
    let ball0 = space.ball_unchecked(b0.center, b0.radius);
    let target = ball0.intersection(e, space);
    let density0 = target.mass() / ball0.mass();
    if density0 > lambda {
        return Err(Error::precondition(
            "density of the set in the starting ball at most the level",
            format!("density {density0} exceeds lambda = {lambda}"),
        ));
    }
    let threshold = lambda / (c_mu * c_mu);
    let h_min = space.min_distance();
    let mut flags = CoverFlags::default();
    let mut details = serde_json::Map::new();
    detail(&mut details, "lambda", lambda);
    detail(&mut details, "c_mu", c_mu);
    detail(&mut details, "good_threshold", threshold);
    detail(&mut details, "start_density", density0);

    let mut good: Vec<Ball> = Vec::new();
    let mut captured = PointSet::empty(space);
    let mut floor_radius = b0.radius;
    if target.is_empty() {
        // nothing to cover
    } else if density0 >= threshold {
        good.push(b0);
        captured = ball0.clone();
    } else {
        let mut bad: Vec<PointSet> = vec![ball0.clone()];
        let mut radius;
        let mut level = 0u32;
        loop {
            level += 1;
            radius = b0.radius * 2f64.powi(-(level as i32));
            let mut centers = PointSet::empty(space);
            for p in &bad {
                centers = centers.union(p, space);
            }
            let mut next_bad = Vec::new();
            for y in centers.iter() {
                let by = space.ball_unchecked(y, radius);
                if !bad.iter().any(|p| p.contains(y) && by.is_subset(p)) {
                    continue;
                }
                let inside = by.intersection_mass(e, space.weights());
                if inside == 0.0 {
                    continue;
                }
                if inside >= threshold * by.mass() {
                    captured = captured.union(&by, space);
                    good.push(Ball::new(y, radius));
                } else {
                    next_bad.push(by);
                }
            }
            bad = next_bad;
            if bad.is_empty() || radius < h_min {
                break;
            }
        }
        floor_radius = radius;
        detail(&mut details, "levels", level);
    }

    let balls = greedy_select(space, &good);
    let uncovered = target.difference(&captured, space);
    let mut floor_balls = Vec::new();
    if !uncovered.is_empty() {
        flags.discreteness_floor = true;
        let mut r = floor_radius;
        while r >= h_min {
            r *= 0.5;
        }
        floor_balls = uncovered.iter().map(|y| Ball::new(y, r)).collect();
    }
    detail(&mut details, "good_balls", good.len());

    let mut req = CoverRequirements::new(5.0);
    req.target = Some(target);
    req.density = Some(DensityBand {
        set: e.clone(),
        lo: threshold,
        hi: lambda,
        hi_strict: false,
    });
    req.dyadic_base = Some(b0.radius);
    req.container = Some(b0);
    let certificate = certify(space, &balls, &floor_balls, &req);
    Ok(BallCover {
        algorithm: CoverAlgorithm::Cz,
        balls,
        floor_balls,
        inflation: 5.0,
        flags,
        certificate,
        details,
    })
}
