//! The matching test of `H0: θ = θ₀` based on the total number of matches
//! `T = Σ kᵢ` over `m` games, its critical values and power.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::classical::Size;
use crate::error::{Error, Result};
use crate::generalised::{ApproxMode, GmdDistribution, GmdParams, Method};
use crate::inference::Dataset;
use crate::numerics::check_probability;

/// Relative slack when deciding whether `pmf(t) <= pmf(t_obs)` in the
/// two-sided p-value, so that floating-point ties count as ties.
pub const TWO_SIDED_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    #[default]
    Greater,
    Less,
    TwoSided,
}

impl FromStr for Alternative {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greater" => Ok(Alternative::Greater),
            "less" => Ok(Alternative::Less),
            "two-sided" | "two.sided" => Ok(Alternative::TwoSided),
            _ => Err(Error::Domain(format!("unknown alternative '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub observed_total: usize,
    pub trials: usize,
    pub mean_matches: f64,
    pub null_prob: f64,
    pub alternative: Alternative,
    pub p_value: f64,
    pub method: Method,
}

/// p-value of an observed total under `Match(t | n, m, θ₀)`.
pub fn p_value(dist: &GmdDistribution, observed_total: usize, alternative: Alternative) -> f64 {
    let p = match alternative {
        Alternative::Greater => dist.upper_tail(observed_total),
        Alternative::Less => dist.cdf(observed_total),
        Alternative::TwoSided => {
            let log_obs = dist.log_pmf(observed_total);
            let threshold = log_obs + TWO_SIDED_TIE_TOLERANCE.ln_1p();
            dist.log_pmf_vector()
                .as_slice()
                .iter()
                .filter(|&&v| v > f64::NEG_INFINITY && v <= threshold)
                .map(|v| v.exp())
                .sum()
        }
    };
    p.clamp(0.0, 1.0)
}

/// Tests `θ = θ₀` against the given alternative using the total matches.
pub fn matching_test(
    data: &Dataset,
    null_prob: f64,
    alternative: Alternative,
    mode: ApproxMode,
) -> Result<TestResult> {
    check_probability(null_prob)?;
    if null_prob == 1.0 {
        return Err(Error::DegenerateNull);
    }
    let params = GmdParams::new(Size::Finite(data.size()), data.len(), null_prob)?;
    let dist = GmdDistribution::new(params, mode)?;
    let observed_total = data.total();
    Ok(TestResult {
        observed_total,
        trials: data.len(),
        mean_matches: data.mean(),
        null_prob,
        alternative,
        p_value: p_value(&dist, observed_total, alternative),
        method: dist.method(),
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLevel(alpha))
    }
}

fn null_distribution(n: usize, m: usize) -> Result<GmdDistribution> {
    GmdDistribution::new(GmdParams::new(Size::Finite(n), m, 0.0)?, ApproxMode::Auto)
}

fn critical_value_of(null: &GmdDistribution, max_total: usize, alpha: f64) -> usize {
    (0..=max_total + 1)
        .find(|&t| null.upper_tail(t) < alpha)
        .unwrap_or(max_total + 1)
}

/// `t* = min{t : P(T >= t | n, m, 0) < α}`; `nm + 1` means the rejection
/// region is empty.
pub fn critical_value(n: usize, m: usize, alpha: f64) -> Result<usize> {
    check_alpha(alpha)?;
    let null = null_distribution(n, m)?;
    Ok(critical_value_of(&null, n * m, alpha))
}

/// `P(T >= t* | n, m, θ)`, zero when the rejection region is empty.
pub fn power(theta: f64, n: usize, m: usize, alpha: f64) -> Result<f64> {
    check_probability(theta)?;
    let t_star = critical_value(n, m, alpha)?;
    power_at(theta, n, m, t_star)
}

fn power_at(theta: f64, n: usize, m: usize, t_star: usize) -> Result<f64> {
    if t_star > n * m {
        return Ok(0.0);
    }
    let params = GmdParams::new(Size::Finite(n), m, theta)?;
    Ok(GmdDistribution::new(params, ApproxMode::Auto)?.upper_tail(t_star))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerCurve {
    pub size: usize,
    pub trials: usize,
    pub alpha: f64,
    pub t_star: usize,
    /// `(θ, power)` in grid order.
    pub points: Vec<(f64, f64)>,
}

/// Power over a grid of θ values with a single critical-value computation.
pub fn power_curve(n: usize, m: usize, alpha: f64, grid: &[f64]) -> Result<PowerCurve> {
    for &theta in grid {
        check_probability(theta)?;
    }
    let t_star = critical_value(n, m, alpha)?;
    let points = grid
        .par_iter()
        .map(|&theta| Ok((theta, power_at(theta, n, m, t_star)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerCurve {
        size: n,
        trials: m,
        alpha,
        t_star,
        points,
    })
}

/// Chance of matching both items when `n = 2`: `(1 + 2θ - θ²) / 2`.
pub fn n2_success_prob(theta: f64) -> Result<f64> {
    check_probability(theta)?;
    Ok((1.0 + 2.0 * theta - theta * theta) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::log_binomial_pmf;

    /// `m` observations for size `n` summing to `total`, each at most `n - 2`.
    fn totals(n: usize, total: usize, m: usize) -> Dataset {
        let mut left = total;
        let obs = (0..m)
            .map(|_| {
                let take = left.min(n - 2);
                left -= take;
                take
            })
            .collect();
        assert_eq!(left, 0);
        Dataset::new(n, obs).unwrap()
    }

    #[test]
    fn classical_null_sixteen_items() {
        let d = totals(16, 65, 40);
        assert_eq!(d.mean(), 1.625);
        let r = matching_test(&d, 0.0, Alternative::Greater, ApproxMode::Auto).unwrap();
        assert_eq!(r.method, Method::Exact);
        assert!((r.p_value - 0.0001726).abs() < 5e-8, "p = {}", r.p_value);
        let r = matching_test(&d, 0.05, Alternative::Greater, ApproxMode::Auto).unwrap();
        assert!((r.p_value - 0.8134).abs() < 5e-5, "p = {}", r.p_value);
    }

    #[test]
    fn two_items_is_binomial() {
        let mut obs = vec![2; 49];
        obs.extend(vec![0; 51]);
        let d = Dataset::new(2, obs).unwrap();
        let r = matching_test(&d, 0.0, Alternative::Greater, ApproxMode::Auto).unwrap();
        let tail: f64 = (49..=100)
            .map(|j| log_binomial_pmf(j, 100, 0.5).unwrap().exp())
            .sum();
        assert!((r.p_value - tail).abs() < 1e-12);
        assert!((r.p_value - 0.6178).abs() < 5e-5);
    }

    #[test]
    fn degenerate_and_zero_total() {
        let d = Dataset::new(5, vec![0, 0]).unwrap();
        assert_eq!(
            matching_test(&d, 1.0, Alternative::Greater, ApproxMode::Auto),
            Err(Error::DegenerateNull)
        );
        let r = matching_test(&d, 0.0, Alternative::Greater, ApproxMode::Auto).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn two_sided_includes_ties() {
        let d = Dataset::new(2, vec![0]).unwrap();
        let r = matching_test(&d, 0.0, Alternative::TwoSided, ApproxMode::Auto).unwrap();
        assert!((r.p_value - 1.0).abs() < 1e-15);
        let r = matching_test(&d, 0.0, Alternative::Less, ApproxMode::Auto).unwrap();
        assert!((r.p_value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn critical_values() {
        assert_eq!(critical_value(2, 1, 0.05).unwrap(), 3);
        assert_eq!(critical_value(4, 1, 0.05).unwrap(), 3);
        assert_eq!(critical_value(4, 1, 0.01).unwrap(), 5);
        assert!(critical_value(4, 1, 0.0).is_err());
    }

    #[test]
    fn power_examples() {
        let p = power(0.5, 4, 1, 0.05).unwrap();
        assert!((p - 0.5442708).abs() < 5e-8, "power = {p}");
        assert!(power(0.0, 4, 1, 0.05).unwrap() <= 0.05);
        assert_eq!(power(1.0, 4, 1, 0.05).unwrap(), 1.0);
        assert_eq!(power(0.7, 2, 1, 0.05).unwrap(), 0.0);
    }

    #[test]
    fn power_grows_with_size() {
        let p10 = power(0.2, 10, 1, 0.05).unwrap();
        let p50 = power(0.2, 50, 1, 0.05).unwrap();
        let p200 = power(0.2, 200, 1, 0.05).unwrap();
        assert!(p50 > p10);
        assert!(p200 > 0.99, "power = {p200}");
    }

    #[test]
    fn curve_is_monotone() {
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
        for (n, m) in [(4, 1), (6, 3), (10, 5)] {
            let c = power_curve(n, m, 0.05, &grid).unwrap();
            for w in c.points.windows(2) {
                assert!(w[1].1 >= w[0].1 - 1e-12, "n = {n}, m = {m}: {w:?}");
            }
            assert!(c.points[0].1 <= 0.05);
        }
        let c = power_curve(4, 1, 0.05, &[0.5]).unwrap();
        assert!((c.points[0].1 - 0.5442708).abs() < 5e-8);
    }

    #[test]
    fn success_prob() {
        assert_eq!(n2_success_prob(0.0).unwrap(), 0.5);
        assert_eq!(n2_success_prob(1.0).unwrap(), 1.0);
        assert_eq!(n2_success_prob(0.5).unwrap(), 0.875);
        assert!(n2_success_prob(-0.1).is_err());
    }

    #[test]
    fn alternative_parsing() {
        assert_eq!(
            "two-sided".parse::<Alternative>().unwrap(),
            Alternative::TwoSided
        );
        assert!("sideways".parse::<Alternative>().is_err());
    }
}
