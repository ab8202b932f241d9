use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::classical::ClassicalTable;
use crate::error::{Error, Result};
use crate::inference::likelihood::{phi_to_theta, Likelihood};
use crate::inference::mle::{mle_with_table, Boundary, MleEstimate};
use crate::inference::Dataset;

pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CiMethod {
    Asymptotic,
    Bootstrap,
}

/// How the lower-tail fraction `α₀` splits the total tail mass `α = 1 - level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailSplit {
    /// Lower tail `α·α₀`, upper tail `α·(1 - α₀)`.
    #[default]
    Fractional,
    /// Lower tail `min(α₀, α)`, upper tail `α` minus that.
    Absolute,
}

impl TailSplit {
    fn tails(self, alpha: f64, fraction: f64) -> (f64, f64) {
        match self {
            TailSplit::Fractional => (alpha * fraction, alpha * (1.0 - fraction)),
            TailSplit::Absolute => {
                let lower = fraction.min(alpha);
                (lower, alpha - lower)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: CiMethod,
    /// Tail mass placed below `lower`.
    pub lower_tail: f64,
    /// Tail mass placed above `upper`.
    pub upper_tail: f64,
    /// Set when an asymptotic interval was pinned at a boundary estimate
    /// instead of coming from a Wald step.
    pub pinned: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MleResult {
    pub estimate: MleEstimate,
    pub ci: ConfidenceInterval,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub level: f64,
    pub method: CiMethod,
    pub split: TailSplit,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            level: 0.95,
            method: CiMethod::Asymptotic,
            split: TailSplit::Fractional,
            resamples: DEFAULT_BOOTSTRAP_RESAMPLES,
            seed: 0,
        }
    }
}

/// `α₀ = max(k̄ - 1, 0) / (n - 1)`, the share of the tail placed below the estimate.
pub fn lower_tail_fraction(data: &Dataset) -> Result<f64> {
    let n = data.size();
    if n < 2 {
        return Err(Error::NotIdentifiable(n));
    }
    Ok(((data.mean() - 1.0).max(0.0) / (n - 1) as f64).min(1.0))
}

fn check_level(level: f64) -> Result<f64> {
    if level > 0.0 && level < 1.0 {
        Ok(1.0 - level)
    } else {
        Err(Error::InvalidLevel(level))
    }
}

fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        Normal::standard().inverse_cdf(p)
    }
}

/// Wald interval on the logit scale with the moving tail split.
///
/// A boundary estimate has no finite `φ̂`; the interval collapses onto the
/// boundary (`[0, 0]` or `[1, 1]`) and is marked `pinned`.
pub fn ci_asymptotic(data: &Dataset, level: f64, split: TailSplit) -> Result<ConfidenceInterval> {
    let table = ClassicalTable::build(data.size());
    let estimate = mle_with_table(data, &table)?;
    asymptotic_from_estimate(data, &table, &estimate, level, split)
}

fn asymptotic_from_estimate(
    data: &Dataset,
    table: &ClassicalTable,
    estimate: &MleEstimate,
    level: f64,
    split: TailSplit,
) -> Result<ConfidenceInterval> {
    let alpha = check_level(level)?;
    let (lower_tail, upper_tail) = split.tails(alpha, lower_tail_fraction(data)?);
    let mut ci = ConfidenceInterval {
        lower: estimate.theta_hat,
        upper: estimate.theta_hat,
        level,
        method: CiMethod::Asymptotic,
        lower_tail,
        upper_tail,
        pinned: estimate.boundary != Boundary::None,
    };
    if ci.pinned {
        return Ok(ci);
    }
    let lik = Likelihood::with_table(data, table);
    let (_, hessian) = lik.score_hessian_phi(estimate.phi_hat)?;
    let information = -hessian;
    if !(information > 0.0 && information.is_finite()) {
        return Err(Error::SingularInformation);
    }
    let se = information.sqrt().recip();
    ci.lower = phi_to_theta(estimate.phi_hat + normal_quantile(lower_tail) * se);
    ci.upper = phi_to_theta(estimate.phi_hat + normal_quantile(1.0 - upper_tail) * se);
    Ok(ci)
}

/// Type-7 sample quantile of sorted values.
fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Bootstrap MLEs, one per resample. Resample `i` draws from its own ChaCha
/// stream `i` under `seed`, so the result does not depend on thread count.
fn bootstrap_estimates(
    data: &Dataset,
    table: &ClassicalTable,
    resamples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let obs = data.observations();
    (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let draw: Vec<usize> = (0..obs.len())
                .map(|_| obs[rng.random_range(0..obs.len())])
                .collect();
            let resample = Dataset::new(data.size(), draw)?;
            Ok(mle_with_table(&resample, table)?.theta_hat)
        })
        .collect()
}

/// Percentile bootstrap interval with the moving tail split, widened if
/// necessary so that it contains the full-sample estimate.
pub fn ci_bootstrap(
    data: &Dataset,
    level: f64,
    resamples: usize,
    seed: u64,
    split: TailSplit,
) -> Result<ConfidenceInterval> {
    let table = ClassicalTable::build(data.size());
    let estimate = mle_with_table(data, &table)?;
    bootstrap_from_estimate(data, &table, &estimate, level, resamples, seed, split)
}

fn bootstrap_from_estimate(
    data: &Dataset,
    table: &ClassicalTable,
    estimate: &MleEstimate,
    level: f64,
    resamples: usize,
    seed: u64,
    split: TailSplit,
) -> Result<ConfidenceInterval> {
    let alpha = check_level(level)?;
    if resamples == 0 {
        return Err(Error::Domain(
            "bootstrap needs at least one resample".into(),
        ));
    }
    let (lower_tail, upper_tail) = split.tails(alpha, lower_tail_fraction(data)?);
    let mut thetas = bootstrap_estimates(data, table, resamples, seed)?;
    thetas.sort_by(f64::total_cmp);
    Ok(ConfidenceInterval {
        lower: sorted_quantile(&thetas, lower_tail).min(estimate.theta_hat),
        upper: sorted_quantile(&thetas, 1.0 - upper_tail).max(estimate.theta_hat),
        level,
        method: CiMethod::Bootstrap,
        lower_tail,
        upper_tail,
        pinned: false,
    })
}

/// MLE together with the requested interval.
pub fn fit(data: &Dataset, options: &FitOptions) -> Result<MleResult> {
    let table = ClassicalTable::build(data.size());
    let estimate = mle_with_table(data, &table)?;
    let ci = match options.method {
        CiMethod::Asymptotic => {
            asymptotic_from_estimate(data, &table, &estimate, options.level, options.split)?
        }
        CiMethod::Bootstrap => bootstrap_from_estimate(
            data,
            &table,
            &estimate,
            options.level,
            options.resamples,
            options.seed,
            options.split,
        )?,
    };
    Ok(MleResult { estimate, ci })
}
