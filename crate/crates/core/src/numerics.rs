//! Log-domain primitives shared by the rest of the crate.
//!
//! Zero probability is represented by `f64::NEG_INFINITY` everywhere; every
//! routine here accepts it without producing NaN.

use std::sync::RwLock;

use serde::Serialize;

use crate::error::{Error, Result};

/// A natural-log value; `-inf` encodes zero probability.
pub type LogReal = f64;

static LOG_FACTORIALS: RwLock<Vec<f64>> = RwLock::new(Vec::new());
static LOG_SUBFACTORIALS: RwLock<Vec<f64>> = RwLock::new(Vec::new());

/// `log(exp(a) + exp(b))` without overflow.
#[inline]
pub fn log_add_exp(a: LogReal, b: LogReal) -> LogReal {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if hi == f64::INFINITY {
        return f64::INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `log Σ exp(values[i])`, shifted by the maximum so that no intermediate
/// term overflows. Returns `-inf` iff every input is `-inf`.
pub fn log_sum_exp(values: &[LogReal]) -> Result<LogReal> {
    if values.is_empty() {
        return Err(Error::EmptyLogSum);
    }
    Ok(log_sum_exp_nonempty(values))
}

/// Infallible form used internally where the slice is known to be non-empty
/// (an empty slice yields `-inf`).
pub(crate) fn log_sum_exp_nonempty(values: &[LogReal]) -> LogReal {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

fn memoized(table: &RwLock<Vec<f64>>, n: usize, extend: fn(&mut Vec<f64>, usize)) -> f64 {
    {
        let guard = table.read().unwrap_or_else(|e| e.into_inner());
        if let Some(&v) = guard.get(n) {
            return v;
        }
    }
    let mut guard = table.write().unwrap_or_else(|e| e.into_inner());
    if guard.len() <= n {
        extend(&mut guard, n);
    }
    guard[n]
}

fn extend_log_factorials(cache: &mut Vec<f64>, n: usize) {
    if cache.is_empty() {
        cache.push(0.0);
    }
    while cache.len() <= n {
        let i = cache.len();
        let prev = cache[i - 1];
        cache.push(prev + (i as f64).ln());
    }
}

fn extend_log_subfactorials(cache: &mut Vec<f64>, n: usize) {
    if cache.is_empty() {
        cache.push(0.0);
    }
    if cache.len() == 1 {
        cache.push(f64::NEG_INFINITY);
    }
    while cache.len() <= n {
        let i = cache.len();
        // D(i) = (i - 1) [D(i - 1) + D(i - 2)]
        let v = ((i - 1) as f64).ln() + log_add_exp(cache[i - 1], cache[i - 2]);
        cache.push(v);
    }
}

/// `log(n!)` by accumulating `log i`; memoized up to the largest `n` requested.
pub fn log_factorial(n: usize) -> LogReal {
    memoized(&LOG_FACTORIALS, n, extend_log_factorials)
}

/// `log D(n)` where `D` counts derangements: `D(0) = 1`, `D(1) = 0`,
/// `D(n) = (n - 1)[D(n - 1) + D(n - 2)]`. `log_subfactorial(1)` is `-inf`.
pub fn log_subfactorial(n: usize) -> LogReal {
    memoized(&LOG_SUBFACTORIALS, n, extend_log_subfactorials)
}

/// `log C(n, k)`; `-inf` when `k > n`.
pub fn log_binomial_coefficient(n: usize, k: usize) -> LogReal {
    if k > n {
        return f64::NEG_INFINITY;
    }
    log_factorial(n) - log_factorial(k) - log_factorial(n - k)
}

pub(crate) fn check_probability(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(theta))
    }
}

/// `log Bin(successes | trials, theta)` with `0 · log 0 = 0`, so the endpoints
/// `theta ∈ {0, 1}` give exact point masses.
pub fn log_binomial_pmf(successes: usize, trials: usize, theta: f64) -> Result<LogReal> {
    check_probability(theta)?;
    if successes > trials {
        return Err(Error::OutsideSupport {
            k: successes,
            n: trials,
        });
    }
    Ok(log_binomial_pmf_with_logs(
        successes,
        trials,
        theta.ln(),
        (-theta).ln_1p(),
    ))
}

/// Binomial log-pmf from precomputed `log θ` and `log(1 - θ)`. Callers that
/// work on the logit scale pass these directly to keep precision near the
/// boundaries.
pub(crate) fn log_binomial_pmf_with_logs(
    successes: usize,
    trials: usize,
    log_theta: f64,
    log_one_minus: f64,
) -> LogReal {
    let failures = trials - successes;
    let mut v = log_binomial_coefficient(trials, successes);
    if successes > 0 {
        v += successes as f64 * log_theta;
    }
    if failures > 0 {
        v += failures as f64 * log_one_minus;
    }
    v
}

/// A vector of log-probabilities over the support `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct LogProbVector(Vec<LogReal>);

impl LogProbVector {
    /// Normalizes `values` by subtracting their log-sum.
    pub fn normalized(mut values: Vec<LogReal>) -> Result<Self> {
        let total = log_sum_exp(&values)?;
        if !total.is_finite() {
            return Err(Error::Domain(format!(
                "cannot normalize log-probabilities with total {total}"
            )));
        }
        for v in values.iter_mut() {
            *v -= total;
        }
        Ok(Self(values))
    }

    /// Point mass at `at` over `0..len`.
    pub fn point_mass(len: usize, at: usize) -> Self {
        let mut values = vec![f64::NEG_INFINITY; len];
        values[at] = 0.0;
        Self(values)
    }

    /// Wraps values that are already normalized.
    pub(crate) fn from_normalized(values: Vec<LogReal>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[LogReal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Log-probability at `k`; `-inf` outside the stored support.
    pub fn get(&self, k: usize) -> LogReal {
        self.0.get(k).copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.0.iter().map(|v| v.exp()).collect()
    }

    pub fn log_total(&self) -> LogReal {
        log_sum_exp_nonempty(&self.0)
    }

    pub fn into_inner(self) -> Vec<LogReal> {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn log_sum_exp_examples() {
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, 0.0]).unwrap(), 0.0);
        let v = log_sum_exp(&[0.25f64.ln(), 0.75f64.ln()]).unwrap();
        assert!(v.abs() < 1e-15);
        let v = log_sum_exp(&[1000.0, 1000.0]).unwrap();
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), Err(Error::EmptyLogSum));
        assert_eq!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]).unwrap(),
            f64::NEG_INFINITY
        );
        assert_eq!(
            log_add_exp(f64::NEG_INFINITY, f64::NEG_INFINITY),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn log_factorial_values() {
        assert_eq!(log_factorial(0), 0.0);
        assert!((log_factorial(5) - 120f64.ln()).abs() < 1e-12);
        let exact: u64 = (1..=20u64).product();
        assert_eq!(exact, 2_432_902_008_176_640_000);
        let rel = (log_factorial(20) - (exact as f64).ln()).abs() / (exact as f64).ln();
        assert!(rel < 1e-12);
    }

    #[test]
    fn log_subfactorial_values() {
        assert_eq!(log_subfactorial(0), 0.0);
        assert_eq!(log_subfactorial(1), f64::NEG_INFINITY);
        assert!((log_subfactorial(4) - 9f64.ln()).abs() < 1e-12);
        assert!((log_subfactorial(10) - 1_334_961f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn subfactorial_matches_rounded_factorial_over_e() {
        for n in 2..=15usize {
            let fact: u64 = (1..=n as u64).product();
            let oracle = (fact as f64 / std::f64::consts::E).round();
            assert_eq!(log_subfactorial(n).exp().round(), oracle, "n = {n}");
        }
    }

    #[test]
    fn binomial_endpoints() {
        assert_eq!(log_binomial_pmf(0, 7, 0.0).unwrap(), 0.0);
        assert_eq!(log_binomial_pmf(2, 2, 1.0).unwrap(), 0.0);
        assert_eq!(log_binomial_pmf(1, 2, 0.0).unwrap(), f64::NEG_INFINITY);
        assert!((log_binomial_pmf(1, 2, 0.5).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        assert!(log_binomial_pmf(3, 2, 0.5).is_err());
        assert!(log_binomial_pmf(1, 2, 1.5).is_err());
        assert!(log_binomial_pmf(1, 2, f64::NAN).is_err());
    }

    #[test]
    fn binomial_normalizes() {
        for n in 0..=60usize {
            for &theta in &[0.0, 0.01, 0.2, 0.5, 0.77, 0.999, 1.0] {
                let total: f64 = (0..=n)
                    .map(|l| log_binomial_pmf(l, n, theta).unwrap().exp())
                    .sum();
                assert!((total - 1.0).abs() < 1e-12, "n = {n}, theta = {theta}");
            }
        }
    }

    #[test]
    fn normalized_vector() {
        let v = LogProbVector::normalized(vec![0.0, f64::NEG_INFINITY, 0.0]).unwrap();
        assert_eq!(v.get(1), f64::NEG_INFINITY);
        assert!((v.probabilities()[0] - 0.5).abs() < 1e-15);
        assert_eq!(v.get(10), f64::NEG_INFINITY);
        assert!(LogProbVector::normalized(vec![f64::NEG_INFINITY]).is_err());
    }

    proptest! {
        #[test]
        fn log_sum_exp_permutation_and_shift(
            mut values in prop::collection::vec(-50.0f64..50.0, 1..20),
            shift in -500.0f64..500.0,
        ) {
            let base = log_sum_exp(&values).unwrap();
            let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
            let s = log_sum_exp(&shifted).unwrap();
            prop_assert!((s - (base + shift)).abs() <= 1e-12 * (1.0 + s.abs()));
            values.reverse();
            let r = log_sum_exp(&values).unwrap();
            prop_assert!((r - base).abs() <= 1e-12 * (1.0 + base.abs()));
        }
    }
}
