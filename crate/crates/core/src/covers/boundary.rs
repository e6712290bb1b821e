use super::check::{certify, CoverRequirements, DensityBand};
use super::{detail, Ball, BallCover, CoverAlgorithm, CoverFlags};
use crate::constants::StructuralConstants;
use crate::error::{Error, Result};
use crate::functionals::graph_perimeter;
use crate::pointset::PointSet;
use crate::space::MetricMeasureSpace;

/// Smallest admissible scale index `⌈log₂(32 (4 C_A/λ)^{1/β})⌉`.
pub fn boundary_scale_bound(c_a: f64, beta: f64, lambda: f64) -> u32 {
    (32.0 * (4.0 * c_a / lambda).powf(1.0 / beta)).log2().ceil().max(1.0) as u32
}

struct Member {
    ball: Ball,
    set: PointSet,
    in_first: bool,
    in_second: bool,
}

fn union_mass(space: &MetricMeasureSpace, sets: impl Iterator<Item = PointSet>) -> f64 {
    let mut u = PointSet::empty(space);
    for s in sets {
        u = u.union(&s, space);
    }
    u.mass()
}

/// Balls at scale `2^{-k} r0` along the boundary of `E` inside `B0`.
///
/// Centers form a maximal `2s/5`-separated set (`s = 2^{-k} r0`), so the
/// fifth-balls are disjoint and the `s`-balls cover. Each radius is chosen in
/// `[s, 2s)` to maximize mass over graph-cut perimeter. Balls inside `B0` are
/// split by the thresholds `λ/C0`, `C0 = 16 C_mu^16`, on the density of `E`
/// and of its complement; either the balls passing both thresholds, or the
/// 6-fold inflations of the balls on the edge of one side, are returned.
///
/// When `k` asks for radii below the smallest positive distance the deepest
/// usable scale is taken and flagged.
pub fn boundary_balls(
    space: &MetricMeasureSpace,
    b0: Ball,
    e: &PointSet,
    lambda: f64,
    k: Option<u32>,
    constants: &StructuralConstants,
) -> Result<BallCover> {
    if !space.is_geodesic() {
        return Err(Error::NotGeodesic);
    }
    b0.validate(space)?;
    if !(lambda > 0.0 && lambda <= 0.5) {
        return Err(Error::precondition(
            "boundary density level in (0, 1/2]",
            format!("lambda = {lambda}"),
        ));
    }
    let ball0 = space.ball_unchecked(b0.center, b0.radius);
    let density0 = ball0.intersection_mass(e, space.weights()) / ball0.mass();
    if density0 < lambda || density0 > 1.0 - lambda {
        return Err(Error::precondition(
            "two-sided density of the set in the starting ball",
            format!("density {density0} outside [{lambda}, {}]", 1.0 - lambda),
        ));
    }
    let annular = constants.annular.ok_or(Error::NotGeodesic)?;
    let c_mu = constants.c_mu;
    let k_min = boundary_scale_bound(annular.c_a, annular.beta, lambda);
    let requested = k.unwrap_or(k_min);
    if requested < k_min {
        return Err(Error::precondition(
            "boundary scale index at least the annular-decay bound",
            format!("k = {requested} is below K = {k_min}"),
        ));
    }
    let h_min = space.min_distance();
    let mut floor_k = 0u32;
    while b0.radius * 2f64.powi(-(floor_k as i32 + 1) + 1) > h_min {
        floor_k += 1;
    }
    let floor_k = floor_k.max(1);
    let mut flags = CoverFlags::default();
    let k_used = if requested > floor_k {
        flags.discreteness_floor = true;
        flags.scale_clamped = Some((requested, floor_k));
        floor_k
    } else {
        requested
    };
    let s = b0.radius * 2f64.powi(-(k_used as i32));

    let n = space.len();
    let full = PointSet::full(space);
    let mut centers: Vec<usize> = Vec::new();
    for x in 0..n {
        if centers.iter().all(|&c| space.d(c, x) >= 0.4 * s) {
            centers.push(x);
        }
    }
    let c0 = 16.0 * c_mu.powi(16);
    let mut threshold = lambda / c0;
    let mut members = Vec::new();
    for &x in &centers {
        let row = space.sorted_row(x);
        let mut radii = vec![s];
        let lo = row.distances.partition_point(|&d| d < s);
        let hi = row.distances.partition_point(|&d| d < 2.0 * s);
        let mut distinct: Vec<f64> = row.distances[lo..hi].to_vec();
        distinct.dedup();
        for (i, &d) in distinct.iter().enumerate() {
            let next = distinct.get(i + 1).copied().unwrap_or(2.0 * s);
            radii.push(0.5 * (d + next));
        }
        let mut best: Option<(f64, Ball, PointSet)> = None;
        for r in radii {
            let set = space.ball_unchecked(x, r);
            let per = graph_perimeter(space, &set, &full)?;
            let score = if per > 0.0 { set.mass() / per } else { f64::INFINITY };
            if best.as_ref().map_or(true, |b| score > b.0) {
                best = Some((score, Ball::new(x, r), set));
            }
        }
        let (_, ball, set) = best.expect("at least one radius");
        if set.is_subset(&ball0) {
            members.push((ball, set));
        }
    }

    let densities: Vec<(f64, f64)> = members
        .iter()
        .map(|(_, set)| {
            let inside = set.intersection_mass(e, space.weights()) / set.mass();
            (inside, set.difference(e, space).mass() / set.mass())
        })
        .collect();
    let smallest_nonzero = densities
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min);
    if threshold < smallest_nonzero && smallest_nonzero.is_finite() {
        flags.threshold_clamped = true;
        threshold = smallest_nonzero;
    }
    let members: Vec<Member> = members
        .into_iter()
        .zip(&densities)
        .map(|((ball, set), &(inside, outside))| Member {
            ball,
            set,
            in_first: inside >= threshold,
            in_second: outside >= threshold,
        })
        .collect();

    let mu0 = ball0.mass();
    let both_mass = union_mass(space, members.iter().filter(|m| m.in_first && m.in_second).map(|m| m.set.clone()));
    let mut details = serde_json::Map::new();
    detail(&mut details, "k_min", k_min);
    detail(&mut details, "k_used", k_used);
    detail(&mut details, "scale", s);
    detail(&mut details, "c0", c0);
    detail(&mut details, "threshold", threshold);
    detail(&mut details, "both_sides_mass_fraction", both_mass / mu0);

    let balls: Vec<Ball> = if both_mass >= lambda / 8.0 * mu0 {
        flags.branch = Some("both_sides".into());
        members.iter().filter(|m| m.in_first && m.in_second).map(|m| m.ball).collect()
    } else {
        let a1 = union_mass(space, members.iter().filter(|m| m.in_first).map(|m| m.set.clone()));
        let a2 = union_mass(space, members.iter().filter(|m| m.in_second).map(|m| m.set.clone()));
        let limit = (0.5 + lambda / 4.0) * mu0;
        detail(&mut details, "first_side_mass_fraction", a1 / mu0);
        detail(&mut details, "second_side_mass_fraction", a2 / mu0);
        let use_first = if a1 <= limit {
            true
        } else if a2 <= limit {
            false
        } else {
            flags.dichotomy_failed = true;
            a1 <= a2
        };
        flags.branch = Some(if use_first { "edge_of_set" } else { "edge_of_complement" }.into());
        let side = |m: &Member| if use_first { m.in_first } else { m.in_second };
        let others: Vec<&Member> = members.iter().filter(|m| !side(m)).collect();
        members
            .iter()
            .filter(|m| side(m))
            .filter(|m| {
                let twice = space.ball_unchecked(m.ball.center, 2.0 * m.ball.radius);
                let six = space.ball_unchecked(m.ball.center, 6.0 * m.ball.radius);
                six.is_subset(&ball0) && others.iter().any(|o| !o.set.is_disjoint(&twice))
            })
            .map(|m| m.ball.scaled(6.0))
            .collect()
    };

    let c_density = 16.0 * c_mu.powi(19);
    let total: f64 = balls
        .iter()
        .map(|b| space.ball_unchecked(b.center, b.radius).mass())
        .sum();
    // Empirical comparison constant of the total-mass bound.
    let comparison = if total > 0.0 {
        2f64.powi(-(k_used as i32)) * mu0 / (total / lambda)
    } else {
        f64::INFINITY
    };
    detail(&mut details, "density_constant", c_density);
    detail(&mut details, "total_mass_comparison", comparison);

    let mut req = CoverRequirements::new(1.0);
    req.disjoint_scale = 1.0 / 60.0;
    req.density = Some(DensityBand {
        set: e.clone(),
        lo: lambda / c_density,
        hi: 1.0 - lambda / c_density,
        hi_strict: false,
    });
    req.container = Some(b0);
    req.radius_band = Some((s, 16.0 * s));
    let certificate = certify(space, &balls, &[], &req);
    Ok(BallCover {
        algorithm: CoverAlgorithm::Boundary,
        balls,
        floor_balls: Vec::new(),
        inflation: 1.0,
        flags,
        certificate,
        details,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::estimate_constants;
    use crate::generators::grid;

    #[test]
    fn scale_bound_formula() {
        // 32 · (4·2/0.5)^1 = 512 → 9
        assert_eq!(boundary_scale_bound(2.0, 1.0, 0.5), 9);
    }

    #[test]
    fn half_plane_on_a_square_grid() {
        let g = grid(2, 33).unwrap();
        let c = estimate_constants(&g, None).unwrap();
        let center = 16 * 33 + 16;
        let e = PointSet::from_predicate(&g, |i| g.coords().unwrap()[i][0] < 0.5);
        let cover = boundary_balls(&g, Ball::new(center, 0.5), &e, 0.4, None, &c).unwrap();
        assert!(!cover.balls.is_empty());
        assert!(cover.flags.discreteness_floor);
        assert!(cover.certificate.passed(), "{:?}", cover.certificate.violations);
        for b in &cover.balls {
            let m = g.ball(b.center, b.radius).unwrap();
            assert!(!m.is_disjoint(&e) && !m.is_subset(&e));
        }
    }

    #[test]
    fn rejects_out_of_band_density() {
        let g = grid(1, 33).unwrap();
        let c = estimate_constants(&g, None).unwrap();
        let e = PointSet::from_indices(&g, 0..3).unwrap();
        assert!(matches!(
            boundary_balls(&g, Ball::new(16, 0.5), &e, 0.4, None, &c),
            Err(Error::Precondition { .. })
        ));
        let e = PointSet::from_indices(&g, 0..16).unwrap();
        assert!(matches!(
            boundary_balls(&g, Ball::new(16, 0.5), &e, 0.4, Some(1), &c),
            Err(Error::Precondition { .. })
        ));
    }
}
