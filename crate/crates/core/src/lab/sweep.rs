use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{check_q, check_tau, indicator_chain};
use super::{ratio, report, FamilySpec, InequalityKind, ReportParams, Witness};
use crate::constants::{doubling_constant, estimate_constants};
use crate::covers::Ball;
use crate::error::{check_theta, Error, Result};
use crate::functionals::mean_and_deviation;
use crate::pointset::PointSet;
use crate::space::MetricMeasureSpace;
use crate::sum::{compensated_sum, NeumaierSum};

const MAX_DISTANCE_CLASSES: usize = 1 << 14;
const MAX_CLASS_TABLE: usize = 1 << 22;
const CHAIN_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Fixed Lebesgue exponent; defaults to `Q/(Q−θ)` per θ.
    pub q: Option<f64>,
    /// Exponent `Q` for the default `q`; estimated when absent.
    pub q_d: Option<f64>,
    pub tau: f64,
    pub rescale: bool,
    /// Ball centers are all points, or this many evenly strided indices.
    pub max_centers: usize,
    pub c_mu: Option<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { q: None, q_d: None, tau: 1.0, rescale: true, max_centers: 16, c_mu: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub theta: f64,
    pub q: Option<f64>,
    #[serde(with = "crate::serde_float")]
    pub max_ratio: f64,
    pub argmax: String,
    #[serde(with = "crate::serde_float")]
    pub median_ratio: f64,
    pub evaluated: usize,
    /// Instances rejected by a precondition of the kind.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSweep {
    pub kind: InequalityKind,
    pub theta_grid: Vec<f64>,
    pub rescaled: bool,
    pub family: FamilySpec,
    pub q_d: Option<f64>,
    pub members: usize,
    pub balls: usize,
    pub points: Vec<SweepPoint>,
}

/// Estimated constants of a Poincaré/relative-isoperimetric pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceGauge {
    pub theta: f64,
    pub q: f64,
    pub poincare_constant: f64,
    pub poincare_argmax: String,
    pub rel_iso_constant: f64,
    pub rel_iso_argmax: String,
    /// Poincaré over relative-isoperimetric constant; absent when the latter is 0.
    pub quotient: Option<f64>,
    pub chain_checked: usize,
    pub chain_violations: Vec<String>,
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::precondition("nonempty theta grid", "no values"));
    }
    for &t in grid {
        check_theta(t)?;
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::precondition("strictly increasing theta grid", format!("{grid:?}")));
    }
    Ok(())
}

/// Every center (or `max_centers` strided ones) times radii `2^{-m}·diam` above the smallest distance.
pub(crate) fn ball_family(space: &MetricMeasureSpace, max_centers: usize) -> Vec<Ball> {
    let n = space.len();
    let centers: Vec<usize> = if n <= max_centers.max(1) {
        (0..n).collect()
    } else {
        (0..max_centers).map(|i| i * n / max_centers).collect()
    };
    let h_min = space.min_distance();
    let mut radii = Vec::new();
    let mut r = space.diameter();
    while r > h_min {
        radii.push(r);
        r *= 0.5;
    }
    centers
        .iter()
        .flat_map(|&c| radii.iter().map(move |&r| Ball::new(c, r)))
        .collect()
}

/// Sums `Σ base(x,y) / d^θ` for several θ at once, grouping pairs by distance
/// value when the space has few distinct distances.
struct MultiTheta<'a> {
    space: &'a MetricMeasureSpace,
    thetas: &'a [f64],
    /// Distinct distances, their powers per θ and the per-pair class index.
    classes: Option<(Vec<Vec<f64>>, Vec<u32>)>,
}

impl<'a> MultiTheta<'a> {
    fn new(space: &'a MetricMeasureSpace, thetas: &'a [f64]) -> Self {
        let n = space.len();
        let mut classes = None;
        if n * n <= MAX_CLASS_TABLE {
            let distinct = space.critical_radii();
            if distinct.len() <= MAX_DISTANCE_CLASSES {
                let mut index = vec![0u32; n * n];
                let mut ok = true;
                for x in 0..n {
                    let row = space.row(x);
                    for y in 0..n {
                        let d = row[y];
                        if d > 0.0 {
                            match distinct.binary_search_by(|v| v.total_cmp(&d)) {
                                Ok(c) => index[x * n + y] = c as u32,
                                Err(_) => ok = false,
                            }
                        }
                    }
                }
                if ok {
                    let powers = thetas.iter().map(|&t| distinct.iter().map(|d| d.powf(t)).collect()).collect();
                    classes = Some((powers, index));
                }
            }
        }
        Self { space, thetas, classes }
    }

    fn sum<F>(&self, xs: &[usize], ys: &[usize], base: F) -> Vec<f64>
    where
        F: Fn(usize, usize, f64, f64) -> f64,
    {
        let space = self.space;
        let n = space.len();
        let table = space.ball_mass_table();
        let masses = |x: usize, y: usize, d: f64| match table {
            Some(t) => (t[x * n + y], t[y * n + x]),
            None => (space.ball_mass(x, d), space.ball_mass(y, d)),
        };
        match &self.classes {
            Some((powers, index)) => {
                let mut hist = vec![NeumaierSum::new(); powers[0].len()];
                for &x in xs {
                    let row = space.row(x);
                    for &y in ys {
                        let d = row[y];
                        if d == 0.0 {
                            continue;
                        }
                        let (mxy, myx) = masses(x, y, d);
                        let v = base(x, y, mxy, myx);
                        if v != 0.0 {
                            hist[index[x * n + y] as usize].add(v);
                        }
                    }
                }
                powers
                    .iter()
                    .map(|pw| compensated_sum(hist.iter().zip(pw).map(|(h, p)| h.value() / p)))
                    .collect()
            }
            None => {
                let mut acc = vec![NeumaierSum::new(); self.thetas.len()];
                for &x in xs {
                    let row = space.row(x);
                    for &y in ys {
                        let d = row[y];
                        if d == 0.0 {
                            continue;
                        }
                        let (mxy, myx) = masses(x, y, d);
                        let v = base(x, y, mxy, myx);
                        if v != 0.0 {
                            for (a, &t) in acc.iter_mut().zip(self.thetas) {
                                a.add(v / d.powf(t));
                            }
                        }
                    }
                }
                acc.iter().map(NeumaierSum::value).collect()
            }
        }
    }
}

struct Instance {
    id: String,
    /// Ratio per θ, `None` when a precondition rejected the instance.
    ratios: Vec<Option<f64>>,
}

fn resolve_qs(space: &MetricMeasureSpace, kind: InequalityKind, thetas: &[f64], options: &SweepOptions) -> Result<(Vec<Option<f64>>, Option<f64>)> {
    if kind == InequalityKind::Boxing {
        return Ok((vec![None; thetas.len()], None));
    }
    if let Some(q) = options.q {
        check_q(q)?;
        return Ok((vec![Some(q); thetas.len()], options.q_d));
    }
    let q_d = match options.q_d {
        Some(q) => q.max(1.0),
        None => estimate_constants(space, None)?.q_effective(),
    };
    Ok((thetas.iter().map(|&t| Some(q_d / (q_d - t))).collect(), Some(q_d)))
}

/// For each θ, the maximum and median ratio of `kind` over every family
/// member (and every ball of the ball family, for local kinds).
pub fn sweep(
    space: &MetricMeasureSpace,
    kind: InequalityKind,
    theta_grid: &[f64],
    family: &FamilySpec,
    options: &SweepOptions,
) -> Result<ThetaSweep> {
    check_grid(theta_grid)?;
    check_tau(options.tau)?;
    if !kind.is_inequality() {
        return Err(Error::precondition(
            "inequality kind evaluated by sweeps",
            format!("{kind} has a dedicated report"),
        ));
    }
    let members = family.members(space)?;
    let (qs, q_d) = resolve_qs(space, kind, theta_grid, options)?;
    let prefactors: Vec<f64> = theta_grid
        .iter()
        .map(|&t| if options.rescale { kind.prefactor(t) } else { 1.0 })
        .collect();
    let balls = if kind.takes_ball() { ball_family(space, options.max_centers) } else { Vec::new() };

    let instances = match kind {
        InequalityKind::Boxing => boxing_instances(space, theta_grid, &members, options)?,
        _ if kind.takes_ball() => local_instances(space, kind, theta_grid, &qs, &prefactors, &members, &balls, options.tau)?,
        _ => global_instances(space, kind, theta_grid, &qs, &prefactors, &members)?,
    };

    let mut points = Vec::with_capacity(theta_grid.len());
    for (k, &theta) in theta_grid.iter().enumerate() {
        let mut values = Vec::new();
        let mut max = f64::NEG_INFINITY;
        let mut argmax = String::new();
        let mut skipped = 0;
        for inst in &instances {
            match inst.ratios[k] {
                Some(r) => {
                    if r > max {
                        max = r;
                        argmax = inst.id.clone();
                    }
                    values.push(r);
                }
                None => skipped += 1,
            }
        }
        if values.is_empty() {
            return Err(Error::precondition(
                "family with at least one admissible member",
                format!("every instance of {kind} was rejected at theta = {theta}"),
            ));
        }
        values.sort_by(f64::total_cmp);
        let m = values.len();
        let median = if m % 2 == 1 { values[m / 2] } else { 0.5 * (values[m / 2 - 1] + values[m / 2]) };
        points.push(SweepPoint {
            theta,
            q: qs[k],
            max_ratio: max,
            argmax,
            median_ratio: median,
            evaluated: m,
            skipped,
        });
    }
    Ok(ThetaSweep {
        kind,
        theta_grid: theta_grid.to_vec(),
        rescaled: options.rescale,
        family: family.clone(),
        q_d,
        members: members.len(),
        balls: balls.len(),
        points,
    })
}

#[allow(clippy::too_many_arguments)]
fn local_instances(
    space: &MetricMeasureSpace,
    kind: InequalityKind,
    thetas: &[f64],
    qs: &[Option<f64>],
    prefactors: &[f64],
    members: &[Witness],
    balls: &[Ball],
    tau: f64,
) -> Result<Vec<Instance>> {
    let inner: Vec<PointSet> = balls.iter().map(|b| space.ball_unchecked(b.center, b.radius)).collect();
    let mut unique: Vec<PointSet> = Vec::new();
    let mut lookup: HashMap<fixedbitset::FixedBitSet, usize> = HashMap::new();
    let outer: Vec<usize> = balls
        .iter()
        .map(|b| {
            let s = space.ball_unchecked(b.center, tau * b.radius);
            *lookup.entry(s.bits().clone()).or_insert_with(|| {
                unique.push(s);
                unique.len() - 1
            })
        })
        .collect();
    let engine = MultiTheta::new(space, thetas);
    let w = space.weights();
    let is_function = kind.takes_function();
    let functions: Vec<Vec<f64>> = if is_function { members.iter().map(|m| m.to_function(space)).collect() } else { Vec::new() };
    let sets: Vec<PointSet> = if is_function { Vec::new() } else { members.iter().map(|m| m.to_set(space)).collect() };

    // Right-hand side sums per (member, distinct outer ball) and θ.
    let jobs: Vec<(usize, usize)> = (0..members.len()).flat_map(|m| (0..unique.len()).map(move |j| (m, j))).collect();
    let sums: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(m, j)| {
            let ob = &unique[j];
            if is_function {
                let u = &functions[m];
                let idx = ob.indices();
                engine.sum(&idx, &idx, |x, y, mxy, _| (u[x] - u[y]).abs() * w[x] * w[y] / mxy)
            } else {
                let e = &sets[m];
                let xs: Vec<usize> = ob.iter().filter(|&i| e.contains(i)).collect();
                let ys: Vec<usize> = ob.iter().filter(|&i| !e.contains(i)).collect();
                engine.sum(&xs, &ys, |x, y, mxy, myx| 2.0 * w[x] * w[y] / (mxy + myx))
            }
        })
        .collect();

    let bbm = matches!(kind, InequalityKind::BbmPoincare | InequalityKind::BbmRelIso);
    let cases: Vec<(usize, usize)> = (0..members.len()).flat_map(|m| (0..balls.len()).map(move |b| (m, b))).collect();
    cases
        .par_iter()
        .map(|&(m, bi)| {
            let ball = balls[bi];
            let b = &inner[bi];
            let ob = &unique[outer[bi]];
            let rhs_sums = &sums[m * unique.len() + outer[bi]];
            let mut ratios = Vec::with_capacity(thetas.len());
            for (k, &theta) in thetas.iter().enumerate() {
                let q = qs[k].expect("local kinds have q");
                let lhs = if is_function {
                    let (_, dev) = mean_and_deviation(space, &functions[m], b, q)?;
                    if bbm {
                        dev
                    } else {
                        dev * b.mass().powf(1.0 / q)
                    }
                } else {
                    let e = &sets[m];
                    let smaller = b.intersection_mass(e, w).min(b.difference(e, space).mass());
                    if bbm {
                        (smaller / b.mass()).powf(1.0 / q)
                    } else {
                        smaller.powf(1.0 / q)
                    }
                };
                let (rhs, scale) = if bbm {
                    (rhs_sums[k] / ob.mass(), prefactors[k] * ball.radius.powf(theta))
                } else {
                    (rhs_sums[k], prefactors[k])
                };
                ratios.push(Some(ratio(lhs, scale, rhs)));
            }
            Ok(Instance {
                id: format!("{}@B({},{})", members[m].id, ball.center, ball.radius),
                ratios,
            })
        })
        .collect()
}

fn global_instances(
    space: &MetricMeasureSpace,
    kind: InequalityKind,
    thetas: &[f64],
    qs: &[Option<f64>],
    prefactors: &[f64],
    members: &[Witness],
) -> Result<Vec<Instance>> {
    let engine = MultiTheta::new(space, thetas);
    let w = space.weights();
    let all: Vec<usize> = (0..space.len()).collect();
    members
        .par_iter()
        .map(|member| {
            let (sums, lhs_at): (Vec<f64>, Box<dyn Fn(f64) -> f64>) = if kind == InequalityKind::BbmSobolev {
                let u = member.to_function(space);
                let sums = engine.sum(&all, &all, |x, y, mxy, _| (u[x] - u[y]).abs() * w[x] * w[y] / mxy);
                let lhs = move |q: f64| compensated_sum(u.iter().zip(w).map(|(v, m)| v.abs().powf(q) * m)).powf(1.0 / q);
                (sums, Box::new(lhs))
            } else {
                let e = member.to_set(space);
                if e.count() == space.len() {
                    return Ok(Instance { id: member.id.clone(), ratios: vec![None; thetas.len()] });
                }
                let xs = e.indices();
                let ys: Vec<usize> = (0..space.len()).filter(|&i| !e.contains(i)).collect();
                let sums = engine.sum(&xs, &ys, |x, y, mxy, myx| 2.0 * w[x] * w[y] / (mxy + myx));
                let mass = e.mass();
                (sums, Box::new(move |q: f64| mass.powf(1.0 / q)))
            };
            let ratios = (0..thetas.len())
                .map(|k| {
                    let q = qs[k].expect("global kinds have q");
                    Some(ratio(lhs_at(q), prefactors[k], sums[k]))
                })
                .collect();
            Ok(Instance { id: member.id.clone(), ratios })
        })
        .collect()
}

fn boxing_instances(space: &MetricMeasureSpace, thetas: &[f64], members: &[Witness], options: &SweepOptions) -> Result<Vec<Instance>> {
    let c_mu = match options.c_mu {
        Some(c) => c,
        None => doubling_constant(space)?,
    };
    members
        .iter()
        .map(|member| {
            let w = Witness::set(member.id.clone(), member.to_set(space));
            let mut ratios = Vec::with_capacity(thetas.len());
            for &theta in thetas {
                let mut p = ReportParams::new(theta, 1.0);
                p.tau = options.tau;
                p.rescale = options.rescale;
                p.c_mu = Some(c_mu);
                match report(space, InequalityKind::Boxing, &p, &w) {
                    Ok(r) => ratios.push(Some(r.ratio)),
                    Err(e) if e.is_precondition() || matches!(e, Error::EmptySet(_)) => ratios.push(None),
                    Err(e) => return Err(e),
                }
            }
            Ok(Instance { id: member.id.clone(), ratios })
        })
        .collect()
}

/// Empirical `(θ,q,1)` Poincaré and relative-isoperimetric constants over
/// the family and ball family, their quotient, and a per-instance check of
/// [`indicator_chain`] on the family's sets.
pub fn equivalence_gauge(
    space: &MetricMeasureSpace,
    theta: f64,
    q: f64,
    family: &FamilySpec,
    options: &SweepOptions,
) -> Result<EquivalenceGauge> {
    check_q(q)?;
    let opts = SweepOptions { q: Some(q), ..*options };
    let p = sweep(space, InequalityKind::BbmPoincare, &[theta], family, &opts)?;
    let r = sweep(space, InequalityKind::BbmRelIso, &[theta], family, &opts)?;
    let (pc, ic) = (&p.points[0], &r.points[0]);
    let quotient = (ic.max_ratio > 0.0).then(|| pc.max_ratio / ic.max_ratio);

    let members = family.members(space)?;
    let balls = ball_family(space, options.max_centers);
    let mut checked = 0;
    let mut violations = Vec::new();
    for m in &members {
        let e = m.to_set(space);
        for ball in &balls {
            let b = space.ball_unchecked(ball.center, ball.radius);
            let (a, bb, c) = indicator_chain(space, &e, &b, q)?;
            checked += 1;
            if a > bb * (1.0 + CHAIN_RTOL) || bb > c * (1.0 + CHAIN_RTOL) {
                violations.push(format!("{}@B({},{}): {a} <= {bb} <= {c} fails", m.id, ball.center, ball.radius));
            }
        }
    }
    Ok(EquivalenceGauge {
        theta,
        q,
        poincare_constant: pc.max_ratio,
        poincare_argmax: pc.argmax.clone(),
        rel_iso_constant: ic.max_ratio,
        rel_iso_argmax: ic.argmax.clone(),
        quotient,
        chain_checked: checked,
        chain_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{grid, random_graph};
    use crate::lab::Family;

    fn thetas() -> Vec<f64> {
        vec![0.1, 0.5, 0.9]
    }

    #[test]
    fn constants_have_zero_ratio() {
        let g = grid(2, 9).unwrap();
        let fam = FamilySpec::new(vec![Family::Constants], 0);
        for kind in [InequalityKind::BbmPoincare, InequalityKind::BbmRelIso, InequalityKind::ImprovedPoincare] {
            let s = sweep(&g, kind, &thetas(), &fam, &SweepOptions::default()).unwrap();
            assert!(s.points.iter().all(|p| p.max_ratio == 0.0 && p.median_ratio == 0.0), "{kind}");
        }
    }

    #[test]
    fn sweep_matches_single_reports() {
        for g in [grid(2, 9).unwrap(), random_graph(25, 12, 5).unwrap()] {
            let fam = FamilySpec::default_with_seed(7);
            let members = fam.members(&g).unwrap();
            let opts = SweepOptions { q: Some(1.5), max_centers: 4, ..Default::default() };
            for kind in [
                InequalityKind::BbmPoincare,
                InequalityKind::ImprovedRelIso,
                InequalityKind::BbmSobolev,
                InequalityKind::BbmGlobalIso,
            ] {
                let s = sweep(&g, kind, &thetas(), &fam, &opts).unwrap();
                for (k, point) in s.points.iter().enumerate() {
                    let mut best = f64::NEG_INFINITY;
                    for m in &members {
                        let w = if kind.takes_function() {
                            Witness::function(m.id.clone(), m.to_function(&g))
                        } else {
                            Witness::set(m.id.clone(), m.to_set(&g))
                        };
                        let balls = if kind.takes_ball() { ball_family(&g, 4) } else { vec![Ball::new(0, 1.0)] };
                        for b in balls {
                            let mut p = ReportParams::new(thetas()[k], 1.5);
                            if kind.takes_ball() {
                                p = p.with_ball(b);
                            }
                            if let Ok(r) = report(&g, kind, &p, &w) {
                                best = best.max(r.ratio);
                            }
                        }
                    }
                    let close = point.max_ratio == best || (point.max_ratio - best).abs() <= 1e-12 * best.abs();
                    assert!(close, "{kind}: {} vs {best}", point.max_ratio);
                }
            }
        }
    }

    #[test]
    fn bad_grids_are_rejected() {
        let g = grid(1, 9).unwrap();
        let fam = FamilySpec::default_with_seed(1);
        let o = SweepOptions::default();
        assert!(sweep(&g, InequalityKind::BbmPoincare, &[], &fam, &o).is_err());
        assert!(sweep(&g, InequalityKind::BbmPoincare, &[0.5, 0.4], &fam, &o).is_err());
        assert!(sweep(&g, InequalityKind::BbmPoincare, &[0.5, 1.0], &fam, &o).is_err());
    }

    #[test]
    fn gauge_on_a_path() {
        let g = grid(1, 33).unwrap();
        let gauge = equivalence_gauge(&g, 0.5, 1.0, &FamilySpec::default_with_seed(3), &SweepOptions::default()).unwrap();
        assert!(gauge.chain_violations.is_empty());
        assert!(gauge.chain_checked > 0);
        assert!(gauge.quotient.unwrap() > 0.0);
        let c = equivalence_gauge(&g, 0.5, 1.0, &FamilySpec::new(vec![Family::Constants], 0), &SweepOptions::default()).unwrap();
        assert_eq!((c.poincare_constant, c.rel_iso_constant, c.quotient), (0.0, 0.0, None));
    }
}
