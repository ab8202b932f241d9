//! Closed-form moments and MGF of the generalised matching distribution.

use crate::classical::{Moments, Size};
use crate::generalised::GmdParams;
use crate::numerics::log_binomial_coefficient;

/// `c · θ^e`, with a zero coefficient contributing nothing even when `e < 0`.
#[inline]
fn term(coef: f64, theta: f64, exponent: i64) -> f64 {
    if coef == 0.0 {
        0.0
    } else {
        coef * theta.powi(exponent as i32)
    }
}

/// Exact single-trial polynomials: mean, variance, third central moment and
/// the fourth cumulant `μ₄ - 3σ⁴`.
fn single_trial_polynomials(n: usize, theta: f64) -> (f64, f64, f64, f64) {
    let nf = n as f64;
    let e = n as i64;
    let t = theta;

    let mean = 1.0 + nf * t - t.powi(e as i32);

    let variance = 1.0 - term(1.0, t, 2 * e) + term(nf, t, 1)
        - term(nf, t, 2)
        - term(nf, t, e - 1)
        - term(nf, t, e)
        + term(2.0 * nf, t, e + 1);

    let third = 1.0 + nf * t * (1.0 - 3.0 * t + 2.0 * t * t)
        - term(nf * (nf - 1.0) / 2.0, t, e - 2)
        - term(nf * (2.0 * nf - 1.0), t, e - 1)
        + term((5.0 * nf * nf - 3.0 * nf + 2.0) / 2.0, t, e)
        + term(3.0 * nf * (nf + 1.0), t, e + 1)
        - term(3.0 * nf * (nf + 1.0), t, e + 2)
        - term(3.0 * nf, t, 2 * e - 1)
        - term(3.0 * nf, t, 2 * e)
        + term(6.0 * nf, t, 2 * e + 1)
        - term(2.0, t, 3 * e);

    // Fourth cumulant, verified symbolically against the exact mixture pmf.
    let fourth_cumulant = 1.0 + nf * t - 7.0 * nf * t.powi(2) + 12.0 * nf * t.powi(3)
        - 6.0 * nf * t.powi(4)
        - term(nf * (nf - 1.0) * (nf - 2.0) / 6.0, t, e - 3)
        - term(3.0 * nf * (nf - 1.0).powi(2) / 2.0, t, e - 2)
        - term(nf * (nf * nf + 3.0 * nf - 8.0) / 2.0, t, e - 1)
        + term(
            (49.0 * nf.powi(3) - 12.0 * nf * nf + 11.0 * nf + 6.0) / 6.0,
            t,
            e,
        )
        - term(2.0 * nf * nf * (2.0 * nf - 3.0), t, e + 1)
        - term(6.0 * nf * (nf + 1.0) * (nf + 2.0), t, e + 2)
        + term(4.0 * nf * (nf + 1.0) * (nf + 2.0), t, e + 3)
        - term(nf * (5.0 * nf - 2.0), t, 2 * e - 2)
        - term(2.0 * nf * (7.0 * nf - 2.0), t, 2 * e - 1)
        + term(19.0 * nf * nf - 6.0 * nf + 4.0, t, 2 * e)
        + term(12.0 * nf * (2.0 * nf + 1.0), t, 2 * e + 1)
        - term(12.0 * nf * (2.0 * nf + 1.0), t, 2 * e + 2)
        - term(12.0 * nf, t, 3 * e - 1)
        - term(12.0 * nf, t, 3 * e)
        + term(24.0 * nf, t, 3 * e + 1)
        - term(6.0, t, 4 * e);

    (mean, variance, third, fourth_cumulant)
}

/// Scales single-trial cumulants to the sum of `trials` IID copies.
fn scale_to_trials(
    mean: f64,
    variance: f64,
    third: f64,
    fourth_cumulant: f64,
    trials: usize,
) -> Moments {
    let m = trials as f64;
    // Cancellation can leave a tiny negative variance for degenerate cases.
    if variance <= 0.0 {
        return Moments::from_central(m * mean, 0.0, 0.0, 0.0);
    }
    Moments {
        mean: m * mean,
        variance: m * variance,
        skewness: Some(third / variance.powf(1.5) / m.sqrt()),
        kurtosis: Some(3.0 + fourth_cumulant / (variance * variance) / m),
    }
}

/// Mean, variance, skewness and kurtosis of the total matches over
/// `params.trials` games, from the exact single-trial polynomials.
///
/// An infinite size (only valid with `θ = 0`) gives the Poisson(`m`) moments.
pub fn gmd_moments(params: &GmdParams) -> Moments {
    match params.size {
        Size::Infinite => scale_to_trials(1.0, 1.0, 1.0, 1.0, params.trials),
        Size::Finite(n) => {
            if params.prob == 1.0 {
                // Point mass; the polynomials collapse to zero up to rounding.
                return Moments::from_central((n * params.trials) as f64, 0.0, 0.0, 0.0);
            }
            let (mean, var, third, k4) = single_trial_polynomials(n, params.prob);
            scale_to_trials(mean, var, third, k4, params.trials)
        }
    }
}

/// Large-`n` equivalents for a single trial, scaled to `params.trials`:
/// `E ~ 1 + nθ`, `V ~ 1 + nθ(1-θ)` and the matching skewness/kurtosis forms.
/// Meaningful for `0 < θ < 1`.
pub fn gmd_moments_asymptotic(params: &GmdParams) -> Moments {
    let n = match params.size {
        Size::Infinite => return gmd_moments(params),
        Size::Finite(n) => n as f64,
    };
    let t = params.prob;
    let spread = n * t * (1.0 - t);
    let variance = 1.0 + spread;
    let third = 1.0 + spread * (1.0 - 2.0 * t);
    let fourth_cumulant = 1.0 + spread * (6.0 * t * t - 6.0 * t + 1.0);
    scale_to_trials(1.0 + n * t, variance, third, fourth_cumulant, params.trials)
}

/// `Σ_{i=0}^{n} ((e^t-1)^i / i!) Σ_{ℓ=0}^{n-i} C(n,ℓ) (θ e^t)^ℓ (1-θ)^{n-ℓ}`.
pub fn gmd_mgf(t: f64, n: usize, theta: f64) -> f64 {
    let x = t.exp_m1();
    let scaled = theta * t.exp();
    // Inner binomial partial sums, indexed by their upper limit n - i.
    let terms: Vec<f64> = (0..=n)
        .map(|l| {
            let log_c = log_binomial_coefficient(n, l);
            let mut v = log_c.exp();
            if l > 0 {
                v *= scaled.powi(l as i32);
            }
            if n > l {
                v *= (1.0 - theta).powi((n - l) as i32);
            }
            v
        })
        .collect();
    let mut partial = vec![0.0; n + 1];
    let mut acc = 0.0;
    for (l, v) in terms.iter().enumerate() {
        acc += v;
        partial[l] = acc;
    }
    let mut coef = 1.0;
    let mut total = 0.0;
    for i in 0..=n {
        if i > 0 {
            coef *= x / i as f64;
        }
        total += coef * partial[n - i];
    }
    total
}
