//! Rebuilds `fixtures/acceptance.json` from the reference formulas and
//! single-instance reports (never the sweep engine):
//! `cargo test -p fracperim --test regenerate_fixtures -- --ignored`.

mod common;

use common::corpus::{self, Curve, Fixtures, GaugeFixture};
use common::oracle;
use fracperim::constants::estimate_constants;
use fracperim::functionals::graph_perimeter;
use fracperim::generators::grid;
use fracperim::lab::InequalityKind;
use fracperim::PointSet;

fn curve(thetas: Vec<f64>, f: impl Fn(f64) -> f64) -> Curve {
    let values = thetas.iter().map(|&t| f(t)).collect();
    Curve { thetas, values }
}

fn spread(c: &Curve) -> (f64, f64) {
    let lo = c.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = c.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

#[test]
#[ignore]
fn regenerate_fixtures() {
    let line = grid(1, 257).unwrap();
    let e = corpus::left_half(&line);
    let full = PointSet::full(&line);
    let cut = graph_perimeter(&line, &e, &full).unwrap();
    let scaling_curve = curve(corpus::scaling_thetas(), |t| (1.0 - t) * oracle::perimeter(&line, &e, &full, t) / cut);
    let (lo, hi) = spread(&scaling_curve);

    let square = grid(2, 33).unwrap();
    let c = estimate_constants(&square, None).unwrap();
    let poincare_curve = curve(corpus::acceptance_thetas(), |t| {
        corpus::max_ratio_by_reports(&square, InequalityKind::BbmPoincare, t, c.default_q(t), true)
    });
    let (p_lo, p_hi) = spread(&poincare_curve);

    let boxing = |s| curve(corpus::acceptance_thetas(), |t| corpus::max_ratio_by_reports(s, InequalityKind::Boxing, t, 1.0, true));
    let boxing_line = boxing(&line);
    let boxing_square = boxing(&square);
    let boxing_constant = spread(&boxing_line).1.max(spread(&boxing_square).1);

    let gauges = corpus::gauge_cases()
        .into_iter()
        .map(|(name, s, theta, q)| {
            let poincare = corpus::max_ratio_by_reports(&s, InequalityKind::BbmPoincare, theta, q, true);
            let rel_iso = corpus::max_ratio_by_reports(&s, InequalityKind::BbmRelIso, theta, q, true);
            let quotient = poincare / rel_iso;
            GaugeFixture {
                space: name.into(),
                theta,
                q,
                poincare,
                rel_iso,
                bracket: (quotient * (1.0 - 1e-9), quotient * (1.0 + 1e-9)),
            }
        })
        .collect();

    let fixtures = Fixtures {
        scaling_curve,
        scaling_bracket: (lo * (1.0 - 1e-9), hi * (1.0 + 1e-9)),
        poincare_curve,
        poincare_spread: p_hi / p_lo * (1.0 + 1e-9),
        boxing_line,
        boxing_square,
        boxing_constant,
        gauges,
        control_theta: 0.9,
        control_q: 1.0,
        control_threshold: 1.25,
    };
    let text = serde_json::to_string_pretty(&fixtures).unwrap();
    std::fs::write(corpus::fixture_path(), text + "\n").unwrap();
}
