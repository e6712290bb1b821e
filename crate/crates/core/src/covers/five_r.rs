use super::check::{certify, CoverRequirements};
use super::{Ball, BallCover, CoverAlgorithm, CoverFlags};
use crate::error::Result;
use crate::pointset::PointSet;
use crate::space::MetricMeasureSpace;

/// Greedy disjoint selection: candidates sorted by radius descending, ties
/// by center ascending; a ball is kept iff its members avoid every kept ball.
pub(crate) fn greedy_select(space: &MetricMeasureSpace, candidates: &[Ball]) -> Vec<Ball> {
    let mut order: Vec<Ball> = candidates.to_vec();
    order.sort_by(|a, b| b.radius.total_cmp(&a.radius).then(a.center.cmp(&b.center)));
    order.dedup();
    let mut used = PointSet::empty(space);
    let mut selected = Vec::new();
    for b in order {
        let m = space.ball_unchecked(b.center, b.radius);
        if m.is_disjoint(&used) {
            used = used.union(&m, space);
            selected.push(b);
        }
    }
    selected
}

/// Disjoint subfamily whose 5-fold inflations contain every candidate.
pub fn five_r_cover(space: &MetricMeasureSpace, candidates: &[Ball]) -> Result<BallCover> {
    for b in candidates {
        b.validate(space)?;
    }
    let balls = greedy_select(space, candidates);
    let mut req = CoverRequirements::new(5.0);
    req.candidates = candidates.to_vec();
    let certificate = certify(space, &balls, &[], &req);
    Ok(BallCover {
        algorithm: CoverAlgorithm::FiveR,
        balls,
        floor_balls: Vec::new(),
        inflation: 5.0,
        flags: CoverFlags::default(),
        certificate,
        details: Default::default(),
    })
}
