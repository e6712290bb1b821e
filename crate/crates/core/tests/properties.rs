mod common;

use common::{oracle, random_function, random_set, random_space, random_theta, rel_close, rng};
use fracperim::constants::doubling_constant;
use fracperim::covers::{cz_decomposition, five_r_cover, Ball};
use fracperim::functionals::{coarea_rhs, fractional_energy, fractional_perimeter, Kernel};
use fracperim::generators::grid;
use fracperim::lab::{indicator_chain, report, InequalityKind, ReportParams, Witness};
use fracperim::PointSet;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn engine_matches_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_space(&mut r, 24);
        let e = random_set(&mut r, &s, 0.5);
        let omega = random_set(&mut r, &s, 0.8);
        let theta = random_theta(&mut r);
        let u = random_function(&mut r, &s);
        let p = fractional_perimeter(&s, &e, &omega, theta).unwrap().value;
        prop_assert!(rel_close(p, oracle::perimeter(&s, &e, &omega, theta), 1e-12));
        let a = fractional_energy(&s, &u, &omega, theta, Kernel::Asymmetric).unwrap().value;
        prop_assert!(rel_close(a, oracle::energy(&s, &u, &omega, theta, false), 1e-12));
        let b = fractional_energy(&s, &u, &omega, theta, Kernel::Symmetric).unwrap().value;
        prop_assert!(rel_close(b, oracle::energy(&s, &u, &omega, theta, true), 1e-12));
    }

    #[test]
    fn perimeter_is_symmetric_under_complement_in_omega(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_space(&mut r, 30);
        let e = random_set(&mut r, &s, 0.4);
        let omega = random_set(&mut r, &s, 0.7);
        let theta = random_theta(&mut r);
        let inner = omega.difference(&e, &s);
        let full = e.complement(&s);
        let p = fractional_perimeter(&s, &e, &omega, theta).unwrap().value;
        prop_assert!(rel_close(p, fractional_perimeter(&s, &inner, &omega, theta).unwrap().value, 1e-12));
        prop_assert!(rel_close(p, fractional_perimeter(&s, &full, &omega, theta).unwrap().value, 1e-12));
    }

    #[test]
    fn symmetric_energy_equals_level_sum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_space(&mut r, 30);
        let u = random_function(&mut r, &s);
        let omega = random_set(&mut r, &s, 0.8);
        let theta = random_theta(&mut r);
        let lhs = fractional_energy(&s, &u, &omega, theta, Kernel::Symmetric).unwrap().value;
        let rhs = coarea_rhs(&s, &u, &omega, theta).unwrap().value;
        prop_assert!(rel_close(lhs, rhs, 1e-9) || (lhs.abs() < 1e-300 && rhs.abs() < 1e-300));
    }

    #[test]
    fn indicator_chain_is_ordered(seed in any::<u64>(), q in 1.0f64..6.0) {
        let mut r = rng(seed);
        let s = random_space(&mut r, 30);
        let e = random_set(&mut r, &s, 0.5);
        let c = r.gen_range(0..s.len());
        let b = s.ball(c, s.diameter() * r.gen_range(0.05..1.1)).unwrap();
        let (a1, a2, a3) = indicator_chain(&s, &e, &b, q).unwrap();
        prop_assert!(a1 <= a2 * (1.0 + 1e-12), "{a1} > {a2}");
        prop_assert!(a2 <= a3 * (1.0 + 1e-12), "{a2} > {a3}");
    }

    #[test]
    fn relative_isoperimetric_report_is_complement_symmetric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_space(&mut r, 30);
        let e = random_set(&mut r, &s, 0.5);
        let ball = Ball::new(r.gen_range(0..s.len()), s.diameter() * r.gen_range(0.1..1.1));
        let params = ReportParams::new(random_theta(&mut r), r.gen_range(1.0..4.0)).with_ball(ball);
        let a = report(&s, InequalityKind::BbmRelIso, &params, &Witness::set("e", e.clone())).unwrap();
        let b = report(&s, InequalityKind::BbmRelIso, &params, &Witness::set("e", e.complement(&s))).unwrap();
        prop_assert_eq!(a.lhs, b.lhs);
        prop_assert!(rel_close(a.rhs_raw, b.rhs_raw, 1e-12));
    }

    #[test]
    fn five_r_ignores_candidate_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random_space(&mut r, 30);
        let mut cands: Vec<Ball> = (0..r.gen_range(1..20))
            .map(|_| Ball::new(r.gen_range(0..s.len()), s.diameter() * [0.1, 0.25, 0.5][r.gen_range(0..3)]))
            .collect();
        let first = five_r_cover(&s, &cands).unwrap();
        cands.shuffle(&mut r);
        let second = five_r_cover(&s, &cands).unwrap();
        prop_assert!(first.certificate.passed(), "{:?}", first.certificate.violations);
        prop_assert_eq!(first.balls, second.balls);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn cz_covers_pass_the_checker(seed in any::<u64>(), side in 9usize..24) {
        let mut r = rng(seed);
        let g = grid(1, side * 4).unwrap();
        let c_mu = doubling_constant(&g).unwrap();
        let p = r.gen_range(0.02..0.3);
        let e = random_set(&mut r, &g, p);
        let b0 = Ball::new(r.gen_range(0..g.len()), r.gen_range(0.1..0.6));
        let ball0 = g.ball(b0.center, b0.radius).unwrap();
        let density = ball0.intersection_mass(&e, g.weights()) / ball0.mass();
        let lambda = (density + 0.05).min(0.9);
        let cover = cz_decomposition(&g, b0, &e, lambda, c_mu).unwrap();
        prop_assert!(cover.certificate.passed(), "{:?}", cover.certificate.violations);
        let target = ball0.intersection(&e, &g);
        let covered = PointSet::from_predicate(&g, |y| {
            cover.balls.iter().chain(&cover.floor_balls).any(|b| g.d(b.center, y) < 5.0 * b.radius)
        });
        prop_assert!(covered.intersection(&target, &g).mass() >= target.mass());
    }
}
