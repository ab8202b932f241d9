//! Inference for the matching probability θ when the size `n` is fixed by
//! design: likelihood, score and Hessian (on the θ and logit scales), the MLE,
//! asymptotic and bootstrap intervals with a moving tail split, and
//! method-of-moments estimates.

mod interval;
mod likelihood;
mod mle;
mod mom;

use serde::Serialize;

use crate::error::{Error, Result};

pub use interval::{
    ci_asymptotic, ci_bootstrap, fit, lower_tail_fraction, CiMethod, ConfidenceInterval,
    FitOptions, MleResult, TailSplit, DEFAULT_BOOTSTRAP_RESAMPLES,
};
pub use likelihood::{
    log_likelihood, phi_to_theta, score_and_hessian_phi, score_and_hessian_theta, theta_to_phi,
    Likelihood,
};
pub use mle::{mle, Boundary, MleEstimate};
pub use mom::{mom_approx, mom_approx_from_mean, mom_estimate, mom_estimate_from_mean};

/// Observed match counts from `m` games of size `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    size: usize,
    observations: Vec<usize>,
}

impl Dataset {
    /// Every observation must lie in `0..=n` and differ from `n - 1`.
    pub fn new(size: usize, observations: Vec<usize>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(&k) = observations
            .iter()
            .find(|&&k| k > size || (size >= 1 && k == size - 1))
        {
            return Err(Error::InvalidObservation { k, n: size });
        }
        Ok(Self { size, observations })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn observations(&self) -> &[usize] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Total matches `Σ kᵢ`.
    pub fn total(&self) -> usize {
        self.observations.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.total() as f64 / self.len() as f64
    }

    /// `k̄ <= 1`, computed on integers.
    pub(crate) fn mean_at_most_one(&self) -> bool {
        self.total() <= self.len()
    }

    /// `k̄ = n`, computed on integers.
    pub(crate) fn mean_is_size(&self) -> bool {
        self.total() == self.size * self.len()
    }
}
