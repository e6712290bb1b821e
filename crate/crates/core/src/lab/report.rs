use serde::{Deserialize, Serialize};

use super::{ratio, InequalityKind, InequalityReport, Witness, WitnessData};
use crate::constants::doubling_constant;
use crate::covers::{boxing_cover, Ball};
use crate::error::{check_theta, Error, Result};
use crate::functionals::{fractional_energy, fractional_perimeter, mean_and_deviation, Kernel};
use crate::pointset::PointSet;
use crate::space::MetricMeasureSpace;
use crate::sum::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub theta: f64,
    pub q: f64,
    pub tau: f64,
    pub ball: Option<Ball>,
    /// Include the `(1−θ)` or `θ(1−θ)` prefactor.
    pub rescale: bool,
    /// Doubling constant for the boxing density band; estimated when absent.
    pub c_mu: Option<f64>,
}

impl ReportParams {
    pub fn new(theta: f64, q: f64) -> Self {
        Self { theta, q, tau: 1.0, ball: None, rescale: true, c_mu: None }
    }

    pub fn with_ball(mut self, ball: Ball) -> Self {
        self.ball = Some(ball);
        self
    }
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if q >= 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::precondition("Lebesgue exponent at least 1", format!("q = {q}")))
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau >= 1.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::precondition("inflation factor at least 1", format!("tau = {tau}")))
    }
}

fn function<'a>(kind: InequalityKind, w: &'a Witness) -> Result<&'a [f64]> {
    match &w.data {
        WitnessData::Function(u) => Ok(u),
        WitnessData::Set(_) => Err(Error::precondition(
            "witness type matches the inequality",
            format!("{kind} needs a function, got set {:?}", w.id),
        )),
    }
}

pub(crate) fn set<'a>(kind: InequalityKind, w: &'a Witness) -> Result<&'a PointSet> {
    match &w.data {
        WitnessData::Set(e) => Ok(e),
        WitnessData::Function(_) => Err(Error::precondition(
            "witness type matches the inequality",
            format!("{kind} needs a set, got function {:?}", w.id),
        )),
    }
}

/// `(min{μ(B∩E), μ(B\E)}/μ(B))^{1/q}`, `(2·density·codensity)^{1/q}` and
/// `(2^{q+1} ⨏_B |χ_E − (χ_E)_B|^q)^{1/q}`, which are nondecreasing in this order.
pub fn indicator_chain(space: &MetricMeasureSpace, e: &PointSet, b: &PointSet, q: f64) -> Result<(f64, f64, f64)> {
    check_q(q)?;
    if b.is_empty() {
        return Err(Error::EmptySet("ball for the indicator chain"));
    }
    let mb = b.mass();
    let inside = b.intersection_mass(e, space.weights());
    let outside = b.difference(e, space).mass();
    let p = inside / mb;
    let c = outside / mb;
    let first = (inside.min(outside) / mb).powf(1.0 / q);
    let second = (2.0 * p * c).powf(1.0 / q);
    let u: Vec<f64> = (0..space.len()).map(|i| if e.contains(i) { 1.0 } else { 0.0 }).collect();
    let (_, dev) = mean_and_deviation(space, &u, b, q)?;
    let third = 2f64.powf((q + 1.0) / q) * dev;
    Ok((first, second, third))
}

/// Evaluates one of the six fractional inequalities or the boxing inequality
/// for a single witness (and ball, for the local kinds).
pub fn report(
    space: &MetricMeasureSpace,
    kind: InequalityKind,
    params: &ReportParams,
    witness: &Witness,
) -> Result<InequalityReport> {
    let theta = params.theta;
    check_theta(theta)?;
    check_tau(params.tau)?;
    if !kind.is_inequality() {
        return Err(Error::precondition(
            "inequality kind evaluated by the general report",
            format!("{kind} has a dedicated report"),
        ));
    }
    if kind != InequalityKind::Boxing {
        check_q(params.q)?;
    }
    let q = params.q;
    let tau = params.tau;
    let pref = if params.rescale { kind.prefactor(theta) } else { 1.0 };
    let mut flags = Vec::new();
    let mut details = serde_json::Map::new();
    let mut pass = None;

    let balls = if kind.takes_ball() {
        let ball = params.ball.ok_or_else(|| {
            Error::precondition("ball supplied for a local inequality", format!("{kind} is quantified over balls"))
        })?;
        ball.validate(space)?;
        let b = space.ball(ball.center, ball.radius)?;
        let tb = space.ball(ball.center, tau * ball.radius)?;
        Some((ball, b, tb))
    } else {
        None
    };

    let (lhs, rhs_raw, scale) = match kind {
        InequalityKind::BbmPoincare | InequalityKind::ImprovedPoincare => {
            let u = function(kind, witness)?;
            let (ball, b, tb) = balls.as_ref().expect("ball kinds");
            let (_, dev) = mean_and_deviation(space, u, b, q)?;
            let energy = fractional_energy(space, u, tb, theta, Kernel::Asymmetric)?.value;
            if kind == InequalityKind::BbmPoincare {
                (dev, energy / tb.mass(), pref * ball.radius.powf(theta))
            } else {
                (dev * b.mass().powf(1.0 / q), energy, pref)
            }
        }
        InequalityKind::BbmRelIso | InequalityKind::ImprovedRelIso => {
            let e = set(kind, witness)?;
            let (ball, b, tb) = balls.as_ref().expect("ball kinds");
            let smaller = b.intersection_mass(e, space.weights()).min(b.difference(e, space).mass());
            let per = fractional_perimeter(space, e, tb, theta)?.value;
            if kind == InequalityKind::BbmRelIso {
                ((smaller / b.mass()).powf(1.0 / q), per / tb.mass(), pref * ball.radius.powf(theta))
            } else {
                (smaller.powf(1.0 / q), per, pref)
            }
        }
        InequalityKind::BbmSobolev => {
            let u = function(kind, witness)?;
            let w = space.weights();
            let lhs = compensated_sum(u.iter().zip(w).map(|(v, m)| v.abs().powf(q) * m)).powf(1.0 / q);
            let energy = fractional_energy(space, u, &PointSet::full(space), theta, Kernel::Asymmetric)?.value;
            (lhs, energy, pref)
        }
        InequalityKind::BbmGlobalIso => {
            let e = set(kind, witness)?;
            if e.count() == space.len() {
                return Err(Error::precondition(
                    "set of finite measure in the global isoperimetric inequality (E is not the whole space)",
                    "E = X has zero perimeter",
                ));
            }
            let per = fractional_perimeter(space, e, &PointSet::full(space), theta)?.value;
            (e.mass().powf(1.0 / q), per, pref)
        }
        InequalityKind::Boxing => {
            let u = set(kind, witness)?;
            let c_mu = match params.c_mu {
                Some(c) => c,
                None => doubling_constant(space)?,
            };
            let cover = boxing_cover(space, u, theta, tau, c_mu)?;
            let per = fractional_perimeter(space, u, &PointSet::full(space), theta)?.value;
            pass = Some(cover.certificate.passed());
            if !cover.certificate.passed() {
                flags.push("certificate_failed".to_string());
            }
            details.insert("balls".into(), cover.balls.len().into());
            details.insert("inflation".into(), cover.inflation.into());
            (cover.certificate.ratio_sum.unwrap_or(0.0), per, pref)
        }
        _ => unreachable!("lemma kinds rejected above"),
    };

    Ok(InequalityReport {
        kind,
        theta: Some(theta),
        q: (kind != InequalityKind::Boxing).then_some(q),
        tau: Some(tau),
        lhs,
        rhs_raw,
        scale,
        ratio: ratio(lhs, scale, rhs_raw),
        rescaled: params.rescale,
        witness: witness.id.clone(),
        ball: balls.map(|b| b.0),
        pass,
        flags,
        details,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::grid;

    fn two_point() -> MetricMeasureSpace {
        MetricMeasureSpace::from_matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn two_point_relative_isoperimetric_ratio() {
        let s = two_point();
        let e = Witness::set("first", PointSet::from_indices(&s, [0]).unwrap());
        let p = ReportParams::new(0.5, 1.0).with_ball(Ball::new(0, 1.5));
        let r = report(&s, InequalityKind::BbmRelIso, &p, &e).unwrap();
        assert_eq!(r.lhs, 0.5);
        assert_eq!(r.rhs_raw, 0.5);
        let expected = 0.5 / (0.5 * 1.5f64.sqrt() * 0.5);
        assert!((r.ratio - expected).abs() < 1e-12 * expected);
        assert!((r.ratio - 1.63299).abs() < 1e-5);
    }

    #[test]
    fn constant_function_has_zero_ratio() {
        let g = grid(1, 17).unwrap();
        let u = Witness::function("one", vec![1.0; g.len()]);
        for kind in [InequalityKind::BbmPoincare, InequalityKind::ImprovedPoincare] {
            let p = ReportParams::new(0.5, 2.0).with_ball(Ball::new(8, 0.3));
            let r = report(&g, kind, &p, &u).unwrap();
            assert_eq!((r.lhs, r.ratio), (0.0, 0.0));
        }
    }

    #[test]
    fn whole_space_is_rejected_by_the_global_inequality() {
        let g = grid(1, 17).unwrap();
        let w = Witness::set("all", PointSet::full(&g));
        let r = report(&g, InequalityKind::BbmGlobalIso, &ReportParams::new(0.5, 1.0), &w);
        assert!(r.unwrap_err().is_precondition());
    }

    #[test]
    fn witness_kind_mismatch_is_rejected() {
        let g = grid(1, 17).unwrap();
        let w = Witness::set("left", PointSet::from_indices(&g, 0..8).unwrap());
        let p = ReportParams::new(0.5, 1.0).with_ball(Ball::new(8, 0.3));
        assert!(report(&g, InequalityKind::BbmPoincare, &p, &w).unwrap_err().is_precondition());
        assert!(report(&g, InequalityKind::BbmRelIso, &ReportParams::new(0.5, 1.0), &w).is_err());
    }

    #[test]
    fn boxing_report_on_an_interval() {
        let g = grid(1, 65).unwrap();
        let w = Witness::set("mid", PointSet::from_indices(&g, 26..38).unwrap());
        let r = report(&g, InequalityKind::Boxing, &ReportParams::new(0.5, 1.0), &w).unwrap();
        assert_eq!(r.pass, Some(true));
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
    }
}
