use super::report::set;
use super::{ratio, InequalityKind, InequalityReport, Witness};
use crate::constants::StructuralConstants;
use crate::covers::Ball;
use crate::error::{check_theta, Error, Result};
use crate::functionals::pair_sum;
use crate::pointset::PointSet;
use crate::space::MetricMeasureSpace;
use crate::sum::NeumaierSum;

fn lemma_report(kind: InequalityKind, theta: Option<f64>, lhs: f64, rhs_raw: f64, scale: f64, witness: &Witness) -> InequalityReport {
    InequalityReport {
        kind,
        theta,
        q: None,
        tau: None,
        lhs,
        rhs_raw,
        scale,
        ratio: ratio(lhs, scale, rhs_raw),
        rescaled: true,
        witness: witness.id.clone(),
        ball: None,
        pass: None,
        flags: Vec::new(),
        details: serde_json::Map::new(),
    }
}

/// Average over `x ∈ B` of the average over `y ∈ B` with `s/2 ≤ d(x,y) < s` of
/// `|χ_E(x) − χ_E(y)|`. Points with an empty annulus contribute 0; their
/// number is returned alongside.
fn annular_average(space: &MetricMeasureSpace, b: &PointSet, e: &PointSet, s: f64) -> (f64, usize) {
    let w = space.weights();
    let mut total = NeumaierSum::new();
    let mut empty = 0;
    for x in b.iter() {
        let row = space.row(x);
        let mut all = NeumaierSum::new();
        let mut cut = NeumaierSum::new();
        for y in b.iter() {
            let d = row[y];
            if d >= 0.5 * s && d < s {
                all.add(w[y]);
                if e.contains(x) != e.contains(y) {
                    cut.add(w[y]);
                }
            }
        }
        if all.value() > 0.0 {
            total.add(w[x] * cut.value() / all.value());
        } else {
            empty += 1;
        }
    }
    (total.value() / b.mass(), empty)
}

/// Smallest `k` with `2^{-kQ} ≤ density`, or `None` when the density is 0 or above 1/2.
fn first_admissible_k(density: f64, q_d: f64) -> Option<u32> {
    if !(density > 0.0 && density <= 0.5) {
        return None;
    }
    let mut k = ((1.0 / density).log2() / q_d).ceil().max(1.0) as u32;
    while k > 1 && 2f64.powf(-((k - 1) as f64) * q_d) <= density {
        k -= 1;
    }
    while 2f64.powf(-(k as f64) * q_d) > density {
        k += 1;
    }
    Some(k)
}

/// The nonlocal isoperimetric estimate at scale `2^{-k} r`:
/// `lhs = (μ(B∩E)/μ(B))^{(Q−1)/Q}`, `rhs_raw = 2^k ⨏_B ⨏_{annulus} |χ_E(x) − χ_E(y)|`.
pub fn frac_iso_report(space: &MetricMeasureSpace, b: Ball, witness: &Witness, k: u32, q_d: f64) -> Result<InequalityReport> {
    let kind = InequalityKind::FracIsoLemma;
    let e = set(kind, witness)?;
    if !space.is_geodesic() {
        return Err(Error::NotGeodesic);
    }
    b.validate(space)?;
    if !(q_d >= 1.0 && q_d.is_finite()) {
        return Err(Error::precondition("lower mass bound exponent at least 1", format!("Q = {q_d}")));
    }
    let ball = space.ball(b.center, b.radius)?;
    let density = ball.intersection_mass(e, space.weights()) / ball.mass();
    let lowest = 2f64.powf(-(k as f64) * q_d);
    if !(density >= lowest && density <= 0.5) {
        let range = match first_admissible_k(density, q_d) {
            Some(k0) => format!("admissible k are those with k >= {k0}"),
            None => "no k is admissible".to_string(),
        };
        return Err(Error::precondition(
            "density window 2^(-kQ) <= mu(B∩E)/mu(B) <= 1/2 of the nonlocal isoperimetric estimate",
            format!("density {density} with k = {k}, Q = {q_d}; {range}"),
        ));
    }
    let s = b.radius * 2f64.powi(-(k as i32));
    let (avg, empty) = annular_average(space, &ball, e, s);
    let lhs = density.powf((q_d - 1.0) / q_d);
    let mut r = lemma_report(kind, None, lhs, 2f64.powi(k as i32) * avg, 1.0, witness);
    r.ball = Some(b);
    if empty > 0 {
        r.flags.push("empty_annulus".into());
    }
    r.details.insert("k".into(), k.into());
    r.details.insert("q_d".into(), q_d.into());
    r.details.insert("density".into(), density.into());
    r.details.insert("empty_annuli".into(), empty.into());
    Ok(r)
}

/// [`frac_iso_report`] at the admissible `k` with the smallest ratio, over
/// all `k` whose annulus radius `2^{-k} r` exceeds the smallest distance.
pub fn frac_iso_best(space: &MetricMeasureSpace, b: Ball, witness: &Witness, q_d: f64) -> Result<InequalityReport> {
    let kind = InequalityKind::FracIsoLemma;
    let e = set(kind, witness)?;
    b.validate(space)?;
    let ball = space.ball(b.center, b.radius)?;
    let density = ball.intersection_mass(e, space.weights()) / ball.mass();
    let h_min = space.min_distance();
    let k0 = first_admissible_k(density, q_d.max(1.0)).ok_or_else(|| {
        Error::precondition(
            "density window 2^(-kQ) <= mu(B∩E)/mu(B) <= 1/2 of the nonlocal isoperimetric estimate",
            format!("density {density}: no k is admissible"),
        )
    })?;
    let mut best: Option<InequalityReport> = None;
    let mut per_k = serde_json::Map::new();
    let mut k = k0;
    while b.radius * 2f64.powi(-(k as i32)) > h_min {
        let r = frac_iso_report(space, b, witness, k, q_d)?;
        per_k.insert(k.to_string(), crate::serde_float::to_value(r.ratio));
        if best.as_ref().map_or(true, |x| r.ratio < x.ratio) {
            best = Some(r);
        }
        k += 1;
    }
    let mut best = best.ok_or_else(|| {
        Error::precondition(
            "an admissible scale above the smallest distance",
            format!("first admissible k = {k0} puts the annulus below the point spacing {h_min}"),
        )
    })?;
    best.details.insert("ratio_by_k".into(), per_k.into());
    Ok(best)
}

/// The annuli estimate `μ(B1) ≤ (4/ε) Σ_{x∈B1} |χ_E(x) − μ(A(x)∩E)/μ(A(x))| μ_x`
/// with `A(x) = B0 ∩ {a/2 ≤ d(x,·) < a}`.
///
/// The radius bound `a / (2 (32 C_mu^4 C_A)^{1/β})` is replaced by twice the
/// smallest distance when it falls below the smallest distance (flagged). An
/// empty `A(x)` contributes `μ_x` (flagged).
pub fn annuli_report(
    space: &MetricMeasureSpace,
    b0: Ball,
    b1: Ball,
    witness: &Witness,
    a: f64,
    eps: f64,
    constants: &StructuralConstants,
) -> Result<InequalityReport> {
    let kind = InequalityKind::AnnuliLemma;
    let e = set(kind, witness)?;
    if !space.is_geodesic() {
        return Err(Error::NotGeodesic);
    }
    b0.validate(space)?;
    b1.validate(space)?;
    if !(a > 0.0 && a <= 0.5 * b0.radius) {
        return Err(Error::precondition(
            "annulus width a <= r0/2 in the annuli estimate",
            format!("a = {a}, r0 = {}", b0.radius),
        ));
    }
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::precondition("density margin eps in (0, 1/2] in the annuli estimate", format!("eps = {eps}")));
    }
    let annular = constants.annular.ok_or(Error::NotGeodesic)?;
    let bound = a / (2.0 * (32.0 * constants.c_mu.powi(4) * annular.c_a).powf(1.0 / annular.beta));
    let h_min = space.min_distance();
    let mut flags = Vec::new();
    let effective = if bound < h_min {
        flags.push("radius_bound_floored".to_string());
        2.0 * h_min
    } else {
        bound
    };
    if b1.radius > effective {
        return Err(Error::precondition(
            "annuli estimate radius bound r1 <= a/(2(32 C_mu^4 C_A)^(1/beta))",
            format!("r1 = {} exceeds the bound {effective} (unfloored {bound})", b1.radius),
        ));
    }
    let ball0 = space.ball(b0.center, b0.radius)?;
    let ball1 = space.ball(b1.center, b1.radius)?;
    if !ball1.is_subset(&ball0) {
        return Err(Error::precondition("B1 contained in B0 in the annuli estimate", "B1 leaves B0"));
    }
    let density = ball1.intersection_mass(e, space.weights()) / ball1.mass();
    if density < eps || density > 1.0 - eps {
        return Err(Error::precondition(
            "eps-density window of E in B1 in the annuli estimate",
            format!("density {density} outside [{eps}, {}]", 1.0 - eps),
        ));
    }
    let w = space.weights();
    let mut sum = NeumaierSum::new();
    let mut empty = 0usize;
    for x in ball1.iter() {
        let row = space.row(x);
        let mut all = NeumaierSum::new();
        let mut inside = NeumaierSum::new();
        for y in ball0.iter() {
            let d = row[y];
            if d >= 0.5 * a && d < a {
                all.add(w[y]);
                if e.contains(y) {
                    inside.add(w[y]);
                }
            }
        }
        if all.value() > 0.0 {
            let chi = if e.contains(x) { 1.0 } else { 0.0 };
            sum.add((chi - inside.value() / all.value()).abs() * w[x]);
        } else {
            empty += 1;
            sum.add(w[x]);
        }
    }
    if empty > 0 {
        flags.push("empty_annulus".to_string());
    }
    let lhs = ball1.mass();
    let rhs_raw = 4.0 / eps * sum.value();
    let mut r = lemma_report(kind, None, lhs, rhs_raw, 1.0, witness);
    r.ball = Some(b1);
    r.pass = Some(lhs <= rhs_raw);
    r.flags = flags;
    r.details.insert("slack".into(), (rhs_raw - lhs).into());
    r.details.insert("radius_bound".into(), bound.into());
    r.details.insert("effective_radius_bound".into(), effective.into());
    r.details.insert("density".into(), density.into());
    r.details.insert("empty_annuli".into(), empty.into());
    Ok(r)
}

/// The large-scale estimate
/// `μ(B(x0,R))/R^θ ≤ C θ Σ_{x∈B(x0,R)∩E} Σ_{y∉E} μ_xμ_y / (d^θ μ(B(x,d)))`
/// under the growth-density hypothesis at `(x0, R, γ)`, which is checked.
pub fn theta_iso_report(
    space: &MetricMeasureSpace,
    witness: &Witness,
    x0: usize,
    radius: f64,
    gamma: f64,
    theta: f64,
    rescale: bool,
) -> Result<InequalityReport> {
    let kind = InequalityKind::ThetaIsoLemma;
    let e = set(kind, witness)?;
    check_theta(theta)?;
    Ball::new(x0, radius).validate(space)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::precondition("density level gamma in (0, 1)", format!("gamma = {gamma}")));
    }
    let half = space.ball(x0, 0.5 * radius)?;
    let half_density = half.intersection_mass(e, space.weights()) / half.mass();
    if half_density < gamma {
        return Err(Error::precondition(
            "growth density: mu(B(x0,R/2)∩E) >= gamma mu(B(x0,R/2))",
            format!("fails at r = {}: density {half_density} < {gamma}", 0.5 * radius),
        ));
    }
    // Open balls about x0 of radius r >= R are B(x0,R) and the closed balls at each distance >= R.
    let row = space.row(x0);
    let w = space.weights();
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by(|&p, &q| row[p].total_cmp(&row[q]).then(p.cmp(&q)));
    let mut all = NeumaierSum::new();
    let mut inside = NeumaierSum::new();
    let mut k = 0;
    while k < order.len() {
        let d = row[order[k]];
        if d >= radius && inside.value() >= gamma * all.value() {
            return Err(Error::precondition(
                "growth density: mu(B(x0,r)∩E) < gamma mu(B(x0,r)) for all r >= R",
                format!("fails at r = {d}: density {}", inside.value() / all.value()),
            ));
        }
        while k < order.len() && row[order[k]] == d {
            all.add(w[order[k]]);
            if e.contains(order[k]) {
                inside.add(w[order[k]]);
            }
            k += 1;
        }
    }
    if inside.value() >= gamma * all.value() {
        return Err(Error::precondition(
            "growth density: mu(B(x0,r)∩E) < gamma mu(B(x0,r)) for all r >= R",
            format!("fails for r above the diameter: density {}", inside.value() / all.value()),
        ));
    }
    let ball = space.ball(x0, radius)?;
    let xs: Vec<usize> = ball.iter().filter(|&x| e.contains(x)).collect();
    let ys: Vec<usize> = (0..space.len()).filter(|&y| !e.contains(y)).collect();
    let (sum, _) = pair_sum(space, &xs, &ys, |x, y, d, mxy, _| w[x] * w[y] / (d.powf(theta) * mxy));
    let lhs = ball.mass() / radius.powf(theta);
    let scale = if rescale { theta } else { 1.0 };
    let mut r = lemma_report(kind, Some(theta), lhs, sum, scale, witness);
    r.rescaled = rescale;
    r.ball = Some(Ball::new(x0, radius));
    r.details.insert("gamma".into(), gamma.into());
    r.details.insert("half_ball_density".into(), half_density.into());
    Ok(r)
}
