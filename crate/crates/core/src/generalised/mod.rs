//! The generalised matching distribution `Match(k | n, θ)` and the
//! total-matches distribution `Match(t | n, m, θ)` over `m` IID games.
//!
//! A single game is `K* = L + K_{n-L}` with `L ~ Bin(n, θ)` items placed
//! correctly by knowledge and the rest permuted at random. The pmf is the
//! mixture
//!
//! `Match(k | n, θ) = Σ_{ℓ=0}^{k} Bin(ℓ | n, θ) · Match(k - ℓ | n - ℓ)`
//!
//! evaluated in log space over a [`ClassicalTable`]. Totals over `m` games
//! come from repeated log-space convolution, or from a renormalized normal
//! density when `m` is large.

mod hdr;
mod moments;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{log_poisson_pmf, ClassicalTable, Moments, Size};
use crate::error::{Error, Result};
use crate::numerics::{
    check_probability, log_binomial_pmf_with_logs, log_sum_exp_nonempty, LogProbVector, LogReal,
};

pub use hdr::HdrRegion;
pub use moments::{gmd_mgf, gmd_moments, gmd_moments_asymptotic};

/// Above this many trials the total-matches distribution switches to the
/// normal approximation unless the caller forces the exact path.
pub const NORMAL_APPROX_TRIALS: usize = 100;

/// Parameters `(n, m, θ)` of a generalised matching distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GmdParams {
    size: Size,
    trials: usize,
    prob: f64,
}

impl GmdParams {
    pub fn new(size: Size, trials: usize, prob: f64) -> Result<Self> {
        check_probability(prob)?;
        if trials == 0 {
            return Err(Error::ZeroTrials);
        }
        if size == Size::Infinite && prob > 0.0 {
            return Err(Error::PointMassAtInfinity);
        }
        Ok(Self { size, trials, prob })
    }

    /// A single game (`m = 1`).
    pub fn single(size: Size, prob: f64) -> Result<Self> {
        Self::new(size, 1, prob)
    }

    pub fn size(&self) -> Size {
        self.size
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn prob(&self) -> f64 {
        self.prob
    }

    /// Largest attainable total `n·m`, or `None` for an infinite size.
    pub fn max_total(&self) -> Option<usize> {
        self.size.finite().map(|n| n * self.trials)
    }
}

/// How the total-matches distribution is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApproxMode {
    /// Exact for `m <= NORMAL_APPROX_TRIALS`, normal approximation beyond.
    #[default]
    Auto,
    Exact,
    Normal,
}

/// The method actually used for a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    NormalApprox,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::NormalApprox => "normal-approx",
        })
    }
}

/// Single-game log-pmf over `k = 0..=n`.
pub fn single_trial_log_pmf(n: usize, theta: f64) -> Result<LogProbVector> {
    check_probability(theta)?;
    if n <= 1 || theta == 1.0 {
        return Ok(single_trial_special(n, theta));
    }
    let table = ClassicalTable::build(n);
    Ok(single_trial_from_table(&table, n, theta))
}

fn single_trial_special(n: usize, theta: f64) -> LogProbVector {
    match n {
        0 => LogProbVector::point_mass(1, 0),
        1 => LogProbVector::point_mass(2, 1),
        _ => {
            debug_assert_eq!(theta, 1.0);
            LogProbVector::point_mass(n + 1, n)
        }
    }
}

/// Single-game log-pmf reusing a prebuilt table (`table.max_size() >= n`).
pub fn single_trial_from_table(table: &ClassicalTable, n: usize, theta: f64) -> LogProbVector {
    if n <= 1 || theta == 1.0 {
        return single_trial_special(n, theta);
    }
    let (log_theta, log_one_minus) = (theta.ln(), (-theta).ln_1p());
    let log_binom: Vec<f64> = (0..=n)
        .map(|l| log_binomial_pmf_with_logs(l, n, log_theta, log_one_minus))
        .collect();
    let mut terms = Vec::with_capacity(n + 1);
    let values: Vec<f64> = (0..=n)
        .map(|k| {
            terms.clear();
            terms.extend((0..=k).map(|l| log_binom[l] + table.log_pmf(k - l, n - l)));
            log_sum_exp_nonempty(&terms)
        })
        .collect();
    LogProbVector::normalized(values).expect("mixture has positive mass")
}

/// Log-space convolution of two pmfs on `0..a.len()` and `0..b.len()`.
pub(crate) fn convolve_log(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len() + b.len() - 1;
    let mut terms = Vec::with_capacity(b.len());
    (0..len)
        .map(|t| {
            let lo = t.saturating_sub(a.len() - 1);
            let hi = t.min(b.len() - 1);
            terms.clear();
            terms.extend((lo..=hi).map(|j| a[t - j] + b[j]));
            log_sum_exp_nonempty(&terms)
        })
        .collect()
}

/// Number of standard deviations kept when materializing a Poisson support.
const POISSON_WINDOW_SDS: f64 = 40.0;

/// A fully computed distribution of the total matches.
///
/// For a finite size the stored log-pmf covers the whole support `0..=n·m`.
/// For `n = ∞` (θ = 0) the distribution is Poisson(`m`); the stored vector is
/// a window beyond which every mass is below `1e-300`, and point queries past
/// it are evaluated analytically.
#[derive(Debug, Clone)]
pub struct GmdDistribution {
    params: GmdParams,
    method: Method,
    log_pmf: LogProbVector,
    poisson_mean: Option<f64>,
    cdf: Vec<f64>,
    upper: Vec<f64>,
}

impl GmdDistribution {
    pub fn new(params: GmdParams, mode: ApproxMode) -> Result<Self> {
        let m = params.trials;
        let (log_pmf, method, poisson_mean) = match params.size {
            Size::Infinite => {
                let mean = m as f64;
                let upper = (mean + POISSON_WINDOW_SDS * mean.sqrt() + 40.0).ceil() as usize;
                let values = (0..=upper).map(|t| log_poisson_pmf(t, mean)).collect();
                (
                    LogProbVector::from_normalized(values),
                    Method::Exact,
                    Some(mean),
                )
            }
            Size::Finite(n) if n <= 1 || params.prob == 1.0 => {
                let total = n * m;
                (
                    LogProbVector::point_mass(total + 1, total),
                    Method::Exact,
                    None,
                )
            }
            Size::Finite(n) => {
                let use_normal = match mode {
                    ApproxMode::Auto => m > NORMAL_APPROX_TRIALS,
                    ApproxMode::Exact => false,
                    ApproxMode::Normal => true,
                };
                if use_normal {
                    (
                        normal_approximation(&params, n * m),
                        Method::NormalApprox,
                        None,
                    )
                } else {
                    (exact_trials(n, m, params.prob), Method::Exact, None)
                }
            }
        };
        Ok(Self::from_parts(params, method, log_pmf, poisson_mean))
    }

    /// Exact single-game distribution.
    pub fn single(size: Size, prob: f64) -> Result<Self> {
        Self::new(GmdParams::single(size, prob)?, ApproxMode::Exact)
    }

    fn from_parts(
        params: GmdParams,
        method: Method,
        log_pmf: LogProbVector,
        poisson_mean: Option<f64>,
    ) -> Self {
        let probs = log_pmf.probabilities();
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cdf.push(acc.min(1.0));
        }
        let mut upper = vec![0.0; probs.len() + 1];
        for t in (0..probs.len()).rev() {
            upper[t] = (upper[t + 1] + probs[t]).min(1.0);
        }
        Self {
            params,
            method,
            log_pmf,
            poisson_mean,
            cdf,
            upper,
        }
    }

    pub fn params(&self) -> &GmdParams {
        &self.params
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// The stored log-pmf (a truncated window for an infinite size).
    pub fn log_pmf_vector(&self) -> &LogProbVector {
        &self.log_pmf
    }

    /// Largest stored support point.
    pub fn support_upper(&self) -> usize {
        self.log_pmf.len() - 1
    }

    pub fn log_pmf(&self, t: usize) -> LogReal {
        match self.poisson_mean {
            Some(mean) if t >= self.log_pmf.len() => log_poisson_pmf(t, mean),
            _ => self.log_pmf.get(t),
        }
    }

    pub fn pmf(&self, t: usize) -> f64 {
        self.log_pmf(t).exp()
    }

    /// `P(T <= t)`.
    pub fn cdf(&self, t: usize) -> f64 {
        self.cdf.get(t).copied().unwrap_or(1.0)
    }

    /// `P(T > t)`, summed over the upper tail rather than taken as `1 - cdf`.
    pub fn sf(&self, t: usize) -> f64 {
        match self.upper.get(t + 1) {
            Some(&v) if t + 1 < self.log_pmf.len() => v,
            _ => self.poisson_tail_beyond(t).exp(),
        }
    }

    /// `P(T >= t)`.
    pub fn upper_tail(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.sf(t - 1)
        }
    }

    /// `log P(T <= t)`, summed in log space so deep tails do not underflow.
    pub fn log_cdf(&self, t: usize) -> LogReal {
        if t >= self.log_pmf.len() {
            return 0.0;
        }
        log_sum_exp_nonempty(&self.log_pmf.as_slice()[..=t]).min(0.0)
    }

    /// `log P(T > t)`.
    pub fn log_sf(&self, t: usize) -> LogReal {
        if t + 1 >= self.log_pmf.len() {
            return self.poisson_tail_beyond(t);
        }
        let stored = log_sum_exp_nonempty(&self.log_pmf.as_slice()[t + 1..]);
        let beyond = self.poisson_tail_beyond(self.support_upper());
        crate::numerics::log_add_exp(stored, beyond).min(0.0)
    }

    /// Log-mass strictly above `t` that lies beyond the stored window; `-inf`
    /// for finite sizes.
    fn poisson_tail_beyond(&self, t: usize) -> LogReal {
        let Some(mean) = self.poisson_mean else {
            return f64::NEG_INFINITY;
        };
        let start = (t + 1).max(self.log_pmf.len());
        let mut terms = Vec::new();
        let mut s = start;
        loop {
            let v = log_poisson_pmf(s, mean);
            terms.push(v);
            if (s as f64) > mean && v < terms[0] - 40.0 {
                break;
            }
            s += 1;
        }
        log_sum_exp_nonempty(&terms)
    }

    fn first_positive(&self) -> usize {
        self.log_pmf
            .as_slice()
            .iter()
            .position(|v| *v > f64::NEG_INFINITY)
            .expect("normalized distribution has positive mass")
    }

    fn last_positive(&self) -> usize {
        self.log_pmf
            .as_slice()
            .iter()
            .rposition(|v| *v > f64::NEG_INFINITY)
            .expect("normalized distribution has positive mass")
    }

    /// Smallest `t` with `P(T <= t) >= p`; `p = 0` gives the smallest support
    /// point with positive mass.
    pub fn quantile(&self, p: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        if p == 0.0 {
            return Ok(self.first_positive());
        }
        Ok(self.search_cdf(p))
    }

    /// Upper-tail quantile: smallest `t` with `P(T > t) <= p`; `p = 1` gives
    /// the smallest support point with positive mass.
    pub fn quantile_upper(&self, p: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        if p == 1.0 {
            return Ok(self.first_positive());
        }
        let idx = self.upper[1..].partition_point(|&v| v > p);
        Ok(idx.min(self.last_positive()))
    }

    fn search_cdf(&self, p: f64) -> usize {
        let idx = self.cdf.partition_point(|&c| c < p);
        if idx < self.cdf.len() {
            idx
        } else {
            self.last_positive()
        }
    }

    /// `count` draws by inverse-transform sampling against the exact CDF.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<usize> {
        (0..count)
            .map(|_| {
                // Uniform on (0, 1] so that zero-mass points are never returned.
                let u = 1.0 - rng.random::<f64>();
                self.search_cdf(u)
            })
            .collect()
    }

    /// Highest-density region with at least `cover_prob` mass.
    pub fn hdr(&self, cover_prob: f64) -> Result<HdrRegion> {
        hdr::greedy_hdr(&self.log_pmf, cover_prob)
    }

    /// Closed-form moments for these parameters.
    pub fn moments(&self) -> Moments {
        gmd_moments(&self.params)
    }
}

fn exact_trials(n: usize, m: usize, theta: f64) -> LogProbVector {
    let single = single_trial_log_pmf(n, theta).expect("validated parameters");
    if m == 1 {
        return single;
    }
    let mut total = single.as_slice().to_vec();
    for _ in 1..m {
        total = convolve_log(&total, single.as_slice());
    }
    LogProbVector::normalized(total).expect("convolution has positive mass")
}

/// Normal density with mean `m·E(K*)` and variance `m·V(K*)` at the integers
/// `0..=max_total`, renormalized. No continuity correction and the impossible
/// total `nm - 1` is left positive.
fn normal_approximation(params: &GmdParams, max_total: usize) -> LogProbVector {
    let moments = gmd_moments(params);
    let (mean, var) = (moments.mean, moments.variance);
    let values = (0..=max_total)
        .map(|t| {
            let z = t as f64 - mean;
            -z * z / (2.0 * var)
        })
        .collect();
    LogProbVector::normalized(values).expect("normal weights are finite")
}

/// Highest-density region for the given parameters.
pub fn gmd_hdr(cover_prob: f64, params: &GmdParams, mode: ApproxMode) -> Result<HdrRegion> {
    GmdDistribution::new(*params, mode)?.hdr(cover_prob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(n: usize, theta: f64) -> GmdDistribution {
        GmdDistribution::single(Size::Finite(n), theta).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn params_validation() {
        assert_eq!(
            GmdParams::new(Size::Infinite, 1, 0.1),
            Err(Error::PointMassAtInfinity)
        );
        assert_eq!(
            GmdParams::new(Size::Finite(3), 0, 0.1),
            Err(Error::ZeroTrials)
        );
        assert!(GmdParams::new(Size::Finite(3), 1, -0.1).is_err());
        assert!(GmdParams::new(Size::Infinite, 2, 0.0).is_ok());
    }

    #[test]
    fn theta_zero_is_classical() {
        let table = ClassicalTable::build(15);
        for n in 0..=15 {
            let v = single_trial_log_pmf(n, 0.0).unwrap();
            for k in 0..=n {
                assert!(
                    close(v.get(k).exp(), table.pmf(k, n), 1e-14),
                    "n = {n}, k = {k}"
                );
            }
        }
    }

    #[test]
    fn enumerated_two_items() {
        let p = single_trial_log_pmf(2, 0.5).unwrap().probabilities();
        assert!(close(p[0], 0.125, 1e-15) && p[1] == 0.0 && close(p[2], 0.875, 1e-15));
    }

    #[test]
    fn special_cases() {
        let v = single_trial_log_pmf(5, 1.0).unwrap();
        assert_eq!(v, LogProbVector::point_mass(6, 5));
        assert_eq!(single_trial_log_pmf(0, 0.4).unwrap().as_slice(), &[0.0]);
        assert_eq!(
            single_trial_log_pmf(1, 0.4).unwrap(),
            LogProbVector::point_mass(2, 1)
        );
    }

    #[test]
    fn trials_convolution() {
        let p = GmdParams::new(Size::Finite(2), 2, 0.0).unwrap();
        let d = GmdDistribution::new(p, ApproxMode::Auto).unwrap();
        let probs = d.log_pmf_vector().probabilities();
        assert_eq!(probs.len(), 5);
        for (got, want) in probs.iter().zip([0.25, 0.0, 0.5, 0.0, 0.25]) {
            assert!(close(*got, want, 1e-15));
        }
        assert_eq!(d.log_pmf(3), f64::NEG_INFINITY);
    }

    #[test]
    fn trivial_trial_cases() {
        let d = GmdDistribution::new(
            GmdParams::new(Size::Finite(1), 7, 0.3).unwrap(),
            ApproxMode::Auto,
        )
        .unwrap();
        assert_eq!(d.pmf(7), 1.0);
        assert_eq!(d.support_upper(), 7);
        let d = GmdDistribution::new(
            GmdParams::new(Size::Finite(4), 500, 1.0).unwrap(),
            ApproxMode::Auto,
        )
        .unwrap();
        assert_eq!(d.pmf(2000), 1.0);
        assert_eq!(d.method(), Method::Exact);
        let d = GmdDistribution::new(
            GmdParams::new(Size::Finite(0), 500, 0.5).unwrap(),
            ApproxMode::Auto,
        )
        .unwrap();
        assert_eq!(d.pmf(0), 1.0);
    }

    #[test]
    fn infinite_size_is_poisson() {
        let d = GmdDistribution::new(
            GmdParams::new(Size::Infinite, 3, 0.0).unwrap(),
            ApproxMode::Auto,
        )
        .unwrap();
        for t in 0..20 {
            let want =
                (-3.0f64).exp() * 3f64.powi(t as i32) / (1..=t).map(|i| i as f64).product::<f64>();
            assert!(close(d.pmf(t), want, 1e-13 * want), "t = {t}");
        }
        assert!(close(d.cdf(2), (-3.0f64).exp() * (1.0 + 3.0 + 4.5), 1e-15));
        assert!(close(d.sf(2), 1.0 - (-3.0f64).exp() * 8.5, 1e-14));
        // Points beyond the stored window still evaluate.
        assert!(d.log_pmf(5000) < -20000.0);
        assert!(d.sf(5000) == 0.0);
    }

    #[test]
    fn auto_switches_to_normal() {
        let p = GmdParams::new(Size::Finite(5), 101, 0.2).unwrap();
        let d = GmdDistribution::new(p, ApproxMode::Auto).unwrap();
        assert_eq!(d.method(), Method::NormalApprox);
        // Approximation leaves the impossible total positive.
        assert!(d.pmf(5 * 101 - 1) >= 0.0);
        assert!(d.log_pmf_vector().log_total().abs() < 1e-12);
        let p = GmdParams::new(Size::Finite(5), 100, 0.2).unwrap();
        assert_eq!(
            GmdDistribution::new(p, ApproxMode::Auto).unwrap().method(),
            Method::Exact
        );
    }

    #[test]
    fn support_hole_for_totals() {
        for n in 2..7 {
            for m in 1..5 {
                for &theta in &[0.0, 0.3, 0.95] {
                    let p = GmdParams::new(Size::Finite(n), m, theta).unwrap();
                    let d = GmdDistribution::new(p, ApproxMode::Exact).unwrap();
                    assert_eq!(
                        d.log_pmf(n * m - 1),
                        f64::NEG_INFINITY,
                        "n={n} m={m} theta={theta}"
                    );
                    assert!(d.log_pmf_vector().log_total().abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn cdf_examples() {
        let d = single(2, 0.5);
        assert!(close(d.cdf(0), 0.125, 1e-15));
        assert!(close(d.cdf(1), 0.125, 1e-15));
        assert_eq!(d.cdf(2), 1.0);
        assert_eq!(d.cdf(99), 1.0);
        assert!(close(d.sf(0), 0.875, 1e-15));
        assert_eq!(d.sf(2), 0.0);
        assert_eq!(d.upper_tail(0), 1.0);
        assert!(close(d.log_cdf(0), 0.125f64.ln(), 1e-14));
        assert!(close(d.log_sf(1), 0.875f64.ln(), 1e-14));
        assert_eq!(d.log_sf(2), f64::NEG_INFINITY);
    }

    #[test]
    fn deep_tail_log_cdf_does_not_underflow() {
        let d = single(1500, 0.5);
        assert_eq!(d.cdf(0), 0.0);
        assert!(d.log_cdf(0).is_finite());
        assert!(d.log_cdf(0) < -700.0);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(single(3, 0.0).quantile(1.0).unwrap(), 3);
        assert_eq!(single(2, 0.5).quantile(0.5).unwrap(), 2);
        assert_eq!(single(2, 0.0).quantile(0.05).unwrap(), 0);
        assert_eq!(single(5, 1.0).quantile(0.0).unwrap(), 5);
        assert!(single(2, 0.0).quantile(1.5).is_err());
        assert_eq!(single(2, 0.5).quantile_upper(0.9).unwrap(), 0);
        assert_eq!(single(2, 0.5).quantile_upper(0.5).unwrap(), 2);
        assert_eq!(single(3, 0.0).quantile_upper(0.0).unwrap(), 3);
    }

    #[test]
    fn sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(single(5, 1.0)
            .sample(10_000, &mut rng)
            .iter()
            .all(|&t| t == 5));
        let draws = single(2, 0.0).sample(10_000, &mut rng);
        assert!(draws.iter().all(|&t| t == 0 || t == 2));

        let d = single(12, 0.2);
        let draws = d.sample(10_000, &mut ChaCha8Rng::seed_from_u64(11));
        let mean = draws.iter().sum::<usize>() as f64 / draws.len() as f64;
        let expected = 1.0 + 12.0 * 0.2 - 0.2f64.powi(12);
        let sd = d.moments().std_dev();
        assert!((mean - expected).abs() < 4.0 * sd / 100.0, "mean = {mean}");

        let again = d.sample(10_000, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(draws, again);
    }

    #[test]
    fn stochastically_increasing_in_theta() {
        for n in [3usize, 8, 15] {
            let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
            let dists: Vec<_> = grid.iter().map(|&t| single(n, t)).collect();
            for w in dists.windows(2) {
                for t in 0..=n {
                    assert!(w[0].cdf(t) - w[1].cdf(t) >= -1e-12);
                }
            }
        }
    }
}
