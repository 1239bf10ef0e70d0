use subzero_core::oracles::Oracle;
use subzero_core::problems::{make_quadratic, suite_instance, Domain, ProblemKind};
use subzero_core::regret::{regret_bound, regret_nv, LevelCase, RegretConfig, RegretPhase};
use subzero_core::{Matrix, Vector};

/// `P(Bin(n, p) >= k)`.
fn binomial_tail(n: u64, p: f64, k: u64) -> f64 {
    let mut total = 0.0;
    for j in k..=n {
        let ln_choose: f64 = (1..=j).map(|i| ((n - j + i) as f64 / i as f64).ln()).sum();
        total += (ln_choose + j as f64 * p.ln() + (n - j) as f64 * (1.0 - p).ln()).exp();
    }
    total
}

#[test]
fn bound_regression_at_unit_parameters() {
    let p = make_quadratic(Matrix::identity(2, 2), Vector::zeros(2), Domain::ball(Vector::zeros(2), 1.0).unwrap()).unwrap();
    assert_eq!((p.radius(), p.lipschitz(), p.smoothness()), (1.0, 1.0, 1.0));
    let cfg = RegretConfig { horizon: 16, delta: 1.0, sigma: 1.0 };
    // K = ceil(48 ln 4) = 67, log16(60), tau = ceil(512 ln(2 / delta'))
    let k = 67.0f64;
    let delta_prime = 1.0 / (8.0 * k * (60.0f64.ln() / 16.0f64.ln()));
    let tau = (512.0 * (2.0 / delta_prime).ln()).ceil();
    let repeats = (32.0 * 4.0 * (2.0 * (k + 1.0)).ln()).ceil();
    let t34 = 8.0;
    let expected = k * (tau + 5.0 * t34 * 2f64.powf(-0.25) * 2.0 * 2.0 * tau.powf(0.25)) + (k + 1.0) * repeats + t34;
    let got = regret_bound(&p, &cfg).unwrap();
    assert!((got - expected).abs() <= 1e-9 * expected, "{got} vs {expected}");
}

#[test]
fn estimates_are_calibrated() {
    let problem = suite_instance(ProblemKind::Quadratic, 2, 0).unwrap();
    let cfg = RegretConfig { horizon: 20_000, delta: 0.1, sigma: 0.05 };
    let runs = 200u64;
    let mut violating = 0u64;
    let mut levels = 0usize;
    for seed in 0..runs {
        let mut o = Oracle::noisy_value(&problem, cfg.sigma, seed).unwrap();
        let (_, trace) = regret_nv(&problem, &mut o, &cfg).unwrap();
        let finished: Vec<_> = trace.levels.iter().filter(|l| l.case != LevelCase::Exhausted).collect();
        levels += finished.len();
        if finished.iter().any(|l| !l.within_confidence(2)) {
            violating += 1;
        }
        for l in &finished {
            if l.case == LevelCase::Escalate && l.within_confidence(2) {
                assert!(l.gradient_norm < 5.0 * 2f64.sqrt() * l.half_width);
            }
        }
    }
    assert!(levels > 0);
    assert!(binomial_tail(runs, cfg.delta, violating) >= 0.05, "{violating} of {runs} runs violate the confidence bound");
}

#[test]
fn noiseless_phase_one_matches_exact_gradients() {
    let problem = suite_instance(ProblemKind::SmoothedNorm, 2, 1).unwrap();
    let cfg = RegretConfig { horizon: 200_000, delta: 0.1, sigma: 0.0 };
    let mut o = Oracle::noisy_value(&problem, 0.0, 0).unwrap();
    let (_, trace) = regret_nv(&problem, &mut o, &cfg).unwrap();
    for l in trace.levels.iter().filter(|l| l.case != LevelCase::Exhausted) {
        // forward differences over a step d_i are off by at most beta d_i / 2 per coordinate
        assert!(l.estimate_error <= 2f64.sqrt() * problem.smoothness() * l.step / 2.0 + 1e-9);
    }
    assert_eq!(trace.total_queries, cfg.horizon);
}

#[test]
fn runs_replay_exactly() {
    let problem = suite_instance(ProblemKind::LogSumExp, 2, 3).unwrap();
    let cfg = RegretConfig { horizon: 30_000, delta: 0.1, sigma: 0.05 };
    let run = |seed| {
        let mut o = Oracle::noisy_value(&problem, cfg.sigma, seed).unwrap();
        regret_nv(&problem, &mut o, &cfg).unwrap()
    };
    let (xa, a) = run(9);
    let (xb, b) = run(9);
    assert_eq!(xa, xb);
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    assert_eq!(a.phase_of(0), RegretPhase::Explore);
}
