use serde::Serialize;

use crate::classical::ClassicalTable;
use crate::error::{Error, Result};
use crate::inference::likelihood::{phi_to_theta, theta_to_phi, Likelihood};
use crate::inference::{mom_approx_from_mean, Dataset};

const MAX_ITERATIONS: usize = 200;
const SCORE_TOLERANCE: f64 = 1e-10;
const STEP_TOLERANCE: f64 = 1e-12;
/// Bracket expansion stops here; `|φ| = 40` is `θ` within `1e-35` of a boundary.
const PHI_LIMIT: f64 = 40.0;

/// Whether the MLE sits on a boundary of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    None,
    AtZero,
    AtOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MleEstimate {
    pub theta_hat: f64,
    pub phi_hat: f64,
    pub max_loglik: f64,
    pub boundary: Boundary,
    pub iterations: usize,
}

/// Maximum likelihood estimate of θ.
///
/// `k̄ <= 1` gives `θ̂ = 0` and `k̄ = n` gives `θ̂ = 1` (the log-likelihood is
/// monotone in those cases). Otherwise the score in `φ` is driven to zero by
/// Newton steps from the approximate MOM value, falling back to bisection
/// whenever a step leaves the current sign-change bracket.
pub fn mle(data: &Dataset) -> Result<MleEstimate> {
    let table = ClassicalTable::build(data.size());
    mle_with_table(data, &table)
}

pub(crate) fn mle_with_table(data: &Dataset, table: &ClassicalTable) -> Result<MleEstimate> {
    let n = data.size();
    if n < 2 {
        return Err(Error::NotIdentifiable(n));
    }
    let lik = Likelihood::with_table(data, table);
    if data.mean_at_most_one() {
        return Ok(MleEstimate {
            theta_hat: 0.0,
            phi_hat: f64::NEG_INFINITY,
            max_loglik: lik.log_likelihood(0.0)?,
            boundary: Boundary::AtZero,
            iterations: 0,
        });
    }
    if data.mean_is_size() {
        return Ok(MleEstimate {
            theta_hat: 1.0,
            phi_hat: f64::INFINITY,
            max_loglik: lik.log_likelihood(1.0)?,
            boundary: Boundary::AtOne,
            iterations: 0,
        });
    }

    let start = mom_approx_from_mean(n, data.mean())?.clamp(1e-6, 1.0 - 1e-6);
    let mut phi = theta_to_phi(start);
    let (mut lo, mut hi) = bracket(&lik, phi)?;
    let mut last_score = f64::NAN;

    for iteration in 1..=MAX_ITERATIONS {
        let (score, hessian) = lik.score_hessian_phi(phi)?;
        last_score = score;
        if score.abs() <= SCORE_TOLERANCE {
            return Ok(finish(&lik, phi, iteration));
        }
        if score > 0.0 {
            lo = phi;
        } else {
            hi = phi;
        }
        let newton = phi - score / hessian;
        let next = if hessian < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - phi).abs() <= STEP_TOLERANCE {
            return Ok(finish(&lik, next, iteration));
        }
        phi = next;
    }
    Err(Error::NonConvergence {
        phi,
        score: last_score,
    })
}

/// Finds `lo < hi` with a positive score at `lo` and a negative one at `hi`.
fn bracket(lik: &Likelihood, phi: f64) -> Result<(f64, f64)> {
    let score = lik.score_phi(phi);
    let (mut lo, mut hi) = (phi, phi);
    if score > 0.0 {
        while lik.score_phi(hi) > 0.0 {
            hi += 1.0;
            if hi > PHI_LIMIT {
                return Err(Error::NonConvergence {
                    phi: hi,
                    score: lik.score_phi(hi),
                });
            }
        }
    } else {
        while lik.score_phi(lo) < 0.0 {
            lo -= 1.0;
            if lo < -PHI_LIMIT {
                return Err(Error::NonConvergence {
                    phi: lo,
                    score: lik.score_phi(lo),
                });
            }
        }
    }
    Ok((lo, hi))
}

fn finish(lik: &Likelihood, phi: f64, iterations: usize) -> MleEstimate {
    MleEstimate {
        theta_hat: phi_to_theta(phi),
        phi_hat: phi,
        max_loglik: lik.log_likelihood_phi(phi),
        boundary: Boundary::None,
        iterations,
    }
}
