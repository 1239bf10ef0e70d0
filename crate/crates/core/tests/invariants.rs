use proptest::prelude::*;

use subzero_core::bounds::{comparator_angle, dp_angle, prune_iterations};
use subzero_core::geometry::{
    cone_prune_geometry, cone_shrink_factor, orthonormal_completion, shallow_cut, shallow_cut_volume_ratio, Ellipsoid,
};
use subzero_core::oracles::Oracle;
use subzero_core::problems::{make_quadratic, suite_instance, Domain, ProblemKind};
use subzero_core::pruning::{fdd_c, pd_c, pd_dp, Derivative};
use subzero_core::solvers::{optimize_dp, optimize_v, SolverConfig};
use subzero_core::{angle_between, Matrix, Sign, Vector};

fn spd(n: usize, entries: &[f64], floor: f64) -> Matrix {
    let b = Matrix::from_fn(n, n, |i, j| entries[(i * n + j) % entries.len()]);
    &b * b.transpose() + Matrix::identity(n, n) * floor
}

fn vector(n: usize, xs: &[f64]) -> Vector {
    Vector::from_fn(n, |i, _| xs[i % xs.len()])
}

fn ellipsoid(n: usize, entries: &[f64], center: &[f64]) -> Ellipsoid {
    Ellipsoid::new(spd(n, entries, 0.2), vector(n, center)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cut_determinant_matches_volume_formula(
        n in 2usize..8,
        entries in prop::collection::vec(-1.0f64..1.0, 64),
        center in prop::collection::vec(-2.0f64..2.0, 8),
        g in prop::collection::vec(-1.0f64..1.0, 8),
        frac in 0.0f64..1.0,
    ) {
        let e = ellipsoid(n, &entries, &center);
        let g = vector(n, &g);
        prop_assume!(g.norm() > 1e-3);
        let sin_theta = frac / n as f64;
        let next = shallow_cut(&e, &g, sin_theta).unwrap();
        let ratio = shallow_cut_volume_ratio(n, sin_theta.asin()).unwrap();
        let det_ratio = (next.log_det() - e.log_det()).exp();
        prop_assert!((det_ratio - ratio * ratio).abs() <= 1e-8 * ratio * ratio);
    }

    #[test]
    fn cut_keeps_the_retained_cap(
        n in 2usize..6,
        entries in prop::collection::vec(-1.0f64..1.0, 36),
        g in prop::collection::vec(-1.0f64..1.0, 6),
        ys in prop::collection::vec(-1.0f64..1.0, 6 * 40),
    ) {
        let e = ellipsoid(n, &entries, &[0.5, -0.3]);
        let g = vector(n, &g);
        prop_assume!(g.norm() > 1e-3);
        let sin_theta = 1.0 / (2.0 * n as f64);
        let next = shallow_cut(&e, &g, sin_theta).unwrap();
        let t = e.isotropic().unwrap();
        for chunk in ys.chunks(6) {
            let mut y = vector(n, chunk);
            if y.norm() > 1.0 {
                y /= y.norm();
            }
            y *= t.radius();
            if g.dot(&y) <= g.norm() * y.norm() * sin_theta {
                prop_assert!(next.membership(&t.inverse(&y)) <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn prune_shrink_is_bounded(
        m in 2usize..11,
        gamma in 0.01f64..std::f64::consts::FRAC_PI_2,
        bits in prop::collection::vec(any::<bool>(), 10),
    ) {
        let basis: Vec<Vector> = (0..m).map(|i| Vector::from_fn(m, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
        let signs: Vec<Sign> = bits[..m].iter().map(|b| if *b { Sign::Plus } else { Sign::Minus }).collect();
        let cone = cone_prune_geometry(gamma, &signs, &basis).unwrap();
        let ratio = cone.semi_angle.sin() / gamma.sin();
        prop_assert!(ratio <= ((m as f64 - 1.0) / m as f64).sqrt() + 1e-12);
        prop_assert!((ratio - cone_shrink_factor(m, gamma)).abs() < 1e-9);
    }

    #[test]
    fn pruning_keeps_gradient_in_cone(
        n in 2usize..7,
        entries in prop::collection::vec(-1.0f64..1.0, 49),
        shape in prop::collection::vec(-1.0f64..1.0, 49),
        center in prop::collection::vec(-0.8f64..0.8, 7),
    ) {
        let q = spd(n, &entries, 0.5);
        let dom = Domain::ball(Vector::zeros(n), 3.0).unwrap();
        let p = make_quadratic(q, Vector::zeros(n), dom).unwrap();
        let c = vector(n, &center);
        prop_assume!(c.norm() > 1e-2);
        let e = Ellipsoid::new(spd(n, &shape, 0.1), c.clone()).unwrap();
        let t = e.isotropic().unwrap();
        let grad = t.gradient_to_isotropic(&p.gradient(&c));
        let mut o = Oracle::directional_preference(&p);
        let theta = dp_angle(n);
        let r = pd_dp(&mut o, &t, theta).unwrap();
        prop_assert!(r.iterations <= prune_iterations(n, theta));
        for s in &r.steps {
            prop_assert!(angle_between(&s.direction, &grad) <= s.angle + 1e-9);
        }
        prop_assert!(angle_between(&r.direction, &grad) <= theta + 1e-9);
    }

    #[test]
    fn fdd_c_is_calibrated(
        kind in 0usize..3,
        n in 2usize..6,
        seed in 0u64..50,
        point in prop::collection::vec(-0.5f64..0.5, 6),
        dir in prop::collection::vec(-1.0f64..1.0, 6),
        log_t in -6.0f64..-1.0,
    ) {
        let p = suite_instance(ProblemKind::ALL[kind], n, seed).unwrap();
        let x = p.domain().center() + vector(n, &point) * (p.domain().radius() / 2.0);
        let d = vector(n, &dir);
        prop_assume!(d.norm() > 1e-3);
        let d = &d / d.norm();
        let e = Ellipsoid::ball(x.clone(), p.domain().radius() / 4.0).unwrap();
        let t = e.isotropic().unwrap();
        let step = 10f64.powf(log_t);
        let deriv = t.gradient_to_isotropic(&p.gradient(&x)).dot(&d);
        let mut o = Oracle::comparator(&p);
        match fdd_c(&mut o, &t, &d, step).unwrap() {
            Derivative::Known(s) => prop_assert!(deriv == 0.0 || Sign::of(deriv) == s),
            Derivative::Unknown => prop_assert!(deriv.abs() <= p.smoothness() * step / 2.0 * (1.0 + 1e-9) + 1e-12),
        }
        prop_assert_eq!(o.queries(), 2);
    }

    #[test]
    fn pd_c_respects_cap_and_target(
        n in 2usize..5,
        entries in prop::collection::vec(-1.0f64..1.0, 25),
        center in prop::collection::vec(-0.8f64..0.8, 5),
    ) {
        let q = spd(n, &entries, 0.5);
        let dom = Domain::ball(Vector::zeros(n), 3.0).unwrap();
        let p = make_quadratic(q, Vector::zeros(n), dom).unwrap();
        let c = vector(n, &center);
        prop_assume!(c.norm() > 0.1);
        let t = Ellipsoid::ball(c.clone(), 0.5).unwrap().isotropic().unwrap();
        let theta = comparator_angle(n);
        let mut o = Oracle::comparator(&p);
        let r = pd_c(&mut o, &t, theta, 1e-6).unwrap();
        let grad = t.gradient_to_isotropic(&p.gradient(&c));
        prop_assert_eq!(o.queries(), 2 * n as u64 * r.iterations as u64);
        if !r.degenerate {
            prop_assert!(r.final_angle <= theta);
            if r.unknown_directions.is_empty() {
                prop_assert!(angle_between(&r.direction, &grad) <= theta + 1e-9);
            }
        }
    }

    #[test]
    fn completion_is_orthonormal(
        n in 2usize..8,
        lead in prop::collection::vec(-1.0f64..1.0, 8),
    ) {
        let lead = vector(n, &lead);
        prop_assume!(lead.norm() > 1e-3);
        let lead = &lead / lead.norm();
        let basis = orthonormal_completion(&[], &lead).unwrap();
        prop_assert_eq!(basis.len(), n);
        prop_assert!((&basis[0] - &lead).norm() < 1e-12);
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((basis[i].dot(&basis[j]) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn noisy_oracle_replays(seed in any::<u64>(), sigma in 0.0f64..1.0) {
        let p = suite_instance(ProblemKind::Quadratic, 2, 0).unwrap();
        let x = p.domain().center();
        let mut a = Oracle::noisy_value(&p, sigma, seed).unwrap();
        let mut b = Oracle::noisy_value(&p, sigma, seed).unwrap();
        for _ in 0..20 {
            prop_assert_eq!(a.query_noisy_value(&x).unwrap().to_bits(), b.query_noisy_value(&x).unwrap().to_bits());
        }
    }

    #[test]
    fn budget_is_enforced(budget in 0u64..20, tries in 0u64..40) {
        let p = suite_instance(ProblemKind::Quadratic, 2, 0).unwrap();
        let x = p.domain().center();
        let mut o = Oracle::value(&p).with_budget(budget);
        let ok = (0..tries).filter(|_| o.query_value(&x).is_ok()).count() as u64;
        prop_assert_eq!(ok, budget.min(tries));
        prop_assert_eq!(o.queries(), budget.min(tries));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solvers_keep_the_minimizer(
        n in 2usize..4,
        entries in prop::collection::vec(-1.0f64..1.0, 9),
        xstar in prop::collection::vec(-0.5f64..0.5, 3),
    ) {
        let q = spd(n, &entries, 0.5);
        let dom = Domain::ball(Vector::zeros(n), 1.0).unwrap();
        let p = make_quadratic(q, vector(n, &xstar), dom).unwrap();
        let cfg = SolverConfig::new(1e-2);
        let mut o = Oracle::directional_preference(&p);
        let (_, trace) = optimize_dp(&p, &mut o, &cfg).unwrap();
        let mut prev = f64::INFINITY;
        for r in &trace.records {
            prop_assert!(r.minimizer_membership <= 1.0 + 1e-6);
            prop_assert!(r.log_volume <= prev + 1e-9);
            prev = r.log_volume;
        }
        prop_assert!(trace.suboptimality <= 1e-2);
        let mut o = Oracle::value(&p);
        let (_, trace) = optimize_v(&p, &mut o, &cfg).unwrap();
        prop_assert!(trace.suboptimality <= 1e-2);
    }
}
