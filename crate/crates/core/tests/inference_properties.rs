use matchdist::classical::Size;
use matchdist::generalised::{ApproxMode, GmdDistribution};
use matchdist::hypothesis::{matching_test, Alternative};
use matchdist::inference::{
    ci_asymptotic, ci_bootstrap, fit, mle, mom_approx, mom_estimate, phi_to_theta,
    score_and_hessian_phi, score_and_hessian_theta, Boundary, CiMethod, Dataset, FitOptions,
    Likelihood, TailSplit,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sample(n: usize, theta: f64, m: usize, seed: u64) -> Dataset {
    let dist = GmdDistribution::single(Size::Finite(n), theta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Dataset::new(n, dist.sample(m, &mut rng)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn score_changes_sign_at_most_once(n in 2usize..15, theta in 0.0f64..0.95, m in 1usize..30, seed in any::<u64>()) {
        let d = sample(n, theta, m, seed);
        let lik = Likelihood::new(&d);
        let mut signs = Vec::new();
        for i in 1..=200 {
            let t = i as f64 / 201.0;
            let (s, _) = lik.score_hessian_theta(t).unwrap();
            if s != 0.0 {
                signs.push(s > 0.0);
            }
        }
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        prop_assert!(changes <= 1);
    }

    #[test]
    fn mle_flags_and_score(n in 2usize..15, theta in 0.0f64..1.0, m in 1usize..40, seed in any::<u64>()) {
        let d = sample(n, theta, m, seed);
        let e = mle(&d).unwrap();
        let flag = if d.mean() <= 1.0 {
            Boundary::AtZero
        } else if d.total() == n * d.len() {
            Boundary::AtOne
        } else {
            Boundary::None
        };
        prop_assert_eq!(e.boundary, flag);
        if flag == Boundary::None {
            let (s, _) = score_and_hessian_theta(&d, e.theta_hat).unwrap();
            prop_assert!(s.abs() <= 1e-8, "score {}", s);
        }
        let r = fit(&d, &FitOptions::default());
        if let Ok(r) = r {
            prop_assert!(r.ci.lower <= r.estimate.theta_hat && r.estimate.theta_hat <= r.ci.upper);
            prop_assert!(0.0 <= r.ci.lower && r.ci.upper <= 1.0);
        }
    }

    #[test]
    fn chain_rule_identities(n in 2usize..12, theta in 0.02f64..0.98, seed in any::<u64>()) {
        let d = sample(n, 0.3, 5, seed);
        let phi = 0.5 * (theta / (1.0 - theta)).ln();
        let t = phi_to_theta(phi);
        let (sp, hp) = score_and_hessian_phi(&d, phi).unwrap();
        let (st, ht) = score_and_hessian_theta(&d, t).unwrap();
        let v = t * (1.0 - t);
        prop_assert!((st * 2.0 * v - sp).abs() <= 1e-8 * sp.abs().max(1.0));
        let rhs = hp + 4.0 * (t - 0.5) * sp;
        prop_assert!((ht * 4.0 * v * v - rhs).abs() <= 1e-8 * rhs.abs().max(1.0));
    }

    #[test]
    fn greater_p_value_decreases_with_total(n in 3usize..12, m in 1usize..5, theta0 in 0.0f64..0.9) {
        let dist = GmdDistribution::new(
            matchdist::GmdParams::new(Size::Finite(n), m, theta0).unwrap(),
            ApproxMode::Exact,
        ).unwrap();
        // Strict decrease whenever the skipped mass is visible in double precision.
        let mut last = (f64::INFINITY, 1.0);
        for t in 0..=n * m {
            let mass = dist.pmf(t);
            if mass > 0.0 {
                let p = dist.upper_tail(t);
                prop_assert!(p <= last.0);
                if last.1 > 1e-12 {
                    prop_assert!(p < last.0);
                }
                last = (p, mass);
            }
        }
    }
}

#[test]
fn mle_close_to_truth() {
    let d = sample(12, 0.2, 500, 3);
    let e = mle(&d).unwrap();
    assert!((e.theta_hat - 0.2).abs() < 0.05);
    assert!(e.iterations < 50);
}

#[test]
fn boundary_intervals() {
    let d = Dataset::new(8, vec![0, 0, 1, 2, 0]).unwrap();
    assert_eq!(
        ci_asymptotic(&d, 0.95, TailSplit::Fractional)
            .unwrap()
            .lower,
        0.0
    );
    assert_eq!(
        ci_bootstrap(&d, 0.95, 200, 1, TailSplit::Fractional)
            .unwrap()
            .lower,
        0.0
    );
    let d = Dataset::new(8, vec![8, 8, 8]).unwrap();
    assert_eq!(
        ci_asymptotic(&d, 0.95, TailSplit::Fractional)
            .unwrap()
            .upper,
        1.0
    );
    assert_eq!(
        ci_bootstrap(&d, 0.95, 200, 1, TailSplit::Fractional)
            .unwrap()
            .upper,
        1.0
    );
}

#[test]
fn absolute_split_changes_interval() {
    let d = sample(10, 0.4, 80, 12);
    let frac = ci_asymptotic(&d, 0.9, TailSplit::Fractional).unwrap();
    let abs = ci_asymptotic(&d, 0.9, TailSplit::Absolute).unwrap();
    assert!((frac.lower_tail + frac.upper_tail - 0.1).abs() < 1e-15);
    assert!((abs.lower_tail + abs.upper_tail - 0.1).abs() < 1e-15);
    assert_ne!(frac, abs);
}

#[test]
fn bootstrap_fit_uses_options() {
    let d = sample(10, 0.3, 50, 77);
    let options = FitOptions {
        method: CiMethod::Bootstrap,
        resamples: 250,
        seed: 5,
        ..FitOptions::default()
    };
    let a = fit(&d, &options).unwrap();
    let b = fit(&d, &options).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.ci.method, CiMethod::Bootstrap);
    assert!(a.ci.lower < a.ci.upper);
}

#[test]
fn mom_brackets_and_test_consistency() {
    let d = sample(16, 0.04, 40, 9);
    let exact = mom_estimate(&d).unwrap();
    let approx = mom_approx(&d).unwrap();
    assert!(exact <= approx + 1e-15);
    let r = matching_test(&d, 0.0, Alternative::Greater, ApproxMode::Auto).unwrap();
    assert_eq!(r.observed_total, d.total());
    assert!((0.0..=1.0).contains(&r.p_value));
}

#[test]
fn exact_and_normal_p_values_agree_near_mean() {
    let params = matchdist::GmdParams::new(Size::Finite(10), 120, 0.1).unwrap();
    let mean = GmdDistribution::new(params, ApproxMode::Exact)
        .unwrap()
        .moments()
        .mean;
    let total = mean.round() as usize;
    // 120 games of size 10 summing to `total`, each at most 8.
    let mut left = total;
    let obs: Vec<usize> = (0..120)
        .map(|_| {
            let take = left.min(8);
            left -= take;
            take
        })
        .collect();
    let d = Dataset::new(10, obs).unwrap();
    let exact = matching_test(&d, 0.1, Alternative::Greater, ApproxMode::Exact).unwrap();
    let normal = matching_test(&d, 0.1, Alternative::Greater, ApproxMode::Auto).unwrap();
    assert_eq!(normal.method, matchdist::Method::NormalApprox);
    assert!((exact.p_value - normal.p_value).abs() <= 0.01);
}
