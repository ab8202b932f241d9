use crate::error::{Error, Result};
use crate::inference::Dataset;

/// Method-of-moments estimate: the root in `[0, 1]` of
/// `F(θ) = θⁿ - nθ + max(k̄ - 1, 0)`, which is strictly decreasing for `n > 1`.
pub fn mom_estimate(data: &Dataset) -> Result<f64> {
    if data.mean_is_size() && data.size() > 1 {
        return Ok(1.0);
    }
    mom_estimate_from_mean(data.size(), data.mean())
}

/// [`mom_estimate`] from the size and the sample mean.
pub fn mom_estimate_from_mean(n: usize, mean: f64) -> Result<f64> {
    if n <= 1 {
        return Err(Error::MomUndefined(n));
    }
    let excess = (mean - 1.0).max(0.0);
    if excess == 0.0 {
        return Ok(0.0);
    }
    if mean >= n as f64 {
        return Ok(1.0);
    }
    let nf = n as f64;
    let f = |t: f64| t.powi(n as i32) - nf * t + excess;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    // Bisect until the midpoint can no longer separate the endpoints.
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if f(lo).abs() <= f(hi).abs() { lo } else { hi })
}

/// Large-`n` approximation `max(k̄ - 1, 0) / (n - 1)`.
pub fn mom_approx(data: &Dataset) -> Result<f64> {
    mom_approx_from_mean(data.size(), data.mean())
}

pub fn mom_approx_from_mean(n: usize, mean: f64) -> Result<f64> {
    if n <= 1 {
        return Err(Error::MomUndefined(n));
    }
    Ok((mean - 1.0).max(0.0) / (n - 1) as f64)
}
