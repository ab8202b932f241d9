use crate::classical::ClassicalTable;
use crate::error::{Error, Result};
use crate::inference::Dataset;
use crate::numerics::{check_probability, log_binomial_pmf_with_logs, log_sum_exp_nonempty};

/// `θ = e^φ / (e^φ + e^{-φ})`.
pub fn phi_to_theta(phi: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * phi).exp())
}

/// `φ = -½ log((1 - θ)/θ)`; `±∞` at the boundaries.
pub fn theta_to_phi(theta: f64) -> f64 {
    0.5 * (theta.ln() - (-theta).ln_1p())
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `(log θ, log(1 - θ))` from `φ` without rounding θ first.
fn phi_log_probs(phi: f64) -> (f64, f64) {
    (-softplus(-2.0 * phi), -softplus(2.0 * phi))
}

/// Posterior summaries of the known-item count `L` given one observation.
struct Posterior {
    log_match: f64,
    /// `E[L | k]`
    first: f64,
    /// `E[L(L-1) | k]`
    second_falling: f64,
}

/// The log-likelihood of a [`Dataset`] with the classical values
/// `M(k, ℓ) = Match(k - ℓ | n - ℓ)` precomputed for every distinct observation.
#[derive(Debug, Clone)]
pub struct Likelihood {
    size: usize,
    /// `(k, multiplicity, log M(k, 0..=k))`
    groups: Vec<(usize, f64, Vec<f64>)>,
}

impl Likelihood {
    pub fn new(data: &Dataset) -> Self {
        let table = ClassicalTable::build(data.size());
        Self::with_table(data, &table)
    }

    /// Requires `table.max_size() >= data.size()`.
    pub fn with_table(data: &Dataset, table: &ClassicalTable) -> Self {
        let n = data.size();
        let mut counts = vec![0usize; n + 1];
        for &k in data.observations() {
            counts[k] += 1;
        }
        let groups = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| {
                let log_m = (0..=k).map(|l| table.log_pmf(k - l, n - l)).collect();
                (k, c as f64, log_m)
            })
            .collect();
        Self { size: n, groups }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn posterior(&self, log_m: &[f64], log_theta: f64, log_one_minus: f64) -> Posterior {
        let n = self.size;
        let terms: Vec<f64> = log_m
            .iter()
            .enumerate()
            .map(|(l, &lm)| log_binomial_pmf_with_logs(l, n, log_theta, log_one_minus) + lm)
            .collect();
        let log_match = log_sum_exp_nonempty(&terms);
        let (mut first, mut second_falling) = (0.0, 0.0);
        if log_match > f64::NEG_INFINITY {
            for (l, &a) in terms.iter().enumerate() {
                let w = (a - log_match).exp();
                let lf = l as f64;
                first += w * lf;
                second_falling += w * lf * (lf - 1.0);
            }
        }
        Posterior {
            log_match,
            first,
            second_falling,
        }
    }

    fn log_likelihood_logs(&self, log_theta: f64, log_one_minus: f64) -> f64 {
        self.groups
            .iter()
            .map(|(_, c, log_m)| {
                let lm = self.posterior(log_m, log_theta, log_one_minus).log_match;
                if lm == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    c * lm
                }
            })
            .sum()
    }

    /// `Σᵢ log Match(kᵢ | n, θ)`; `-inf` when some observation is impossible.
    pub fn log_likelihood(&self, theta: f64) -> Result<f64> {
        check_probability(theta)?;
        Ok(self.log_likelihood_logs(theta.ln(), (-theta).ln_1p()))
    }

    /// Log-likelihood as a function of `φ`.
    pub fn log_likelihood_phi(&self, phi: f64) -> f64 {
        let (a, b) = phi_log_probs(phi);
        self.log_likelihood_logs(a, b)
    }

    /// `Σᵢ (E[L | kᵢ] - nθ)`.
    fn summed_centred(&self, theta: f64, log_theta: f64, log_one_minus: f64) -> f64 {
        let nf = self.size as f64;
        self.groups
            .iter()
            .map(|(_, c, log_m)| {
                c * (self.posterior(log_m, log_theta, log_one_minus).first - nf * theta)
            })
            .sum()
    }

    /// Per-observation score and Hessian for θ, summed:
    ///
    /// `s(θ) = Σ [ℓ - nθ] Bin(ℓ|n,θ) M(k,ℓ) / (θ(1-θ) Match(k|n,θ))`,
    /// `H(θ) = Σ [ℓ(ℓ-1) - 2ℓ(n-1)θ + n(n-1)θ²] Bin M / (θ²(1-θ)² Match) - s(θ)²`.
    ///
    /// The sums are evaluated as posterior expectations of `L` given each
    /// observation, which keeps every weight in `[0, 1]`.
    pub fn score_hessian_theta(&self, theta: f64) -> Result<(f64, f64)> {
        check_probability(theta)?;
        if theta == 0.0 || theta == 1.0 {
            return Err(Error::BoundaryParameter(theta));
        }
        let nf = self.size as f64;
        let v = theta * (1.0 - theta);
        let (log_theta, log_one_minus) = (theta.ln(), (-theta).ln_1p());
        let mut score = 0.0;
        let mut hessian = 0.0;
        for (_, c, log_m) in &self.groups {
            let p = self.posterior(log_m, log_theta, log_one_minus);
            let s = (p.first - nf * theta) / v;
            let quad = p.second_falling - 2.0 * (nf - 1.0) * theta * p.first
                + nf * (nf - 1.0) * theta * theta;
            score += c * s;
            hessian += c * (quad / (v * v) - s * s);
        }
        Ok((score, hessian))
    }

    /// Score and Hessian on the logit scale:
    ///
    /// `s(φ) = 2 Σ [ℓ - nθ] Bin M / Match`,
    /// `H(φ) = 4 Σ [ℓ(ℓ-1) - 2ℓ(n-1)θ + n(n-1)θ²] Bin M / Match - 4(θ - ½) s(φ) - s(φ)²`.
    pub fn score_hessian_phi(&self, phi: f64) -> Result<(f64, f64)> {
        if !phi.is_finite() {
            return Err(Error::BoundaryParameter(phi_to_theta(phi)));
        }
        let theta = phi_to_theta(phi);
        let (log_theta, log_one_minus) = phi_log_probs(phi);
        let nf = self.size as f64;
        let mut score = 0.0;
        let mut hessian = 0.0;
        for (_, c, log_m) in &self.groups {
            let p = self.posterior(log_m, log_theta, log_one_minus);
            let s = 2.0 * (p.first - nf * theta);
            let quad = p.second_falling - 2.0 * (nf - 1.0) * theta * p.first
                + nf * (nf - 1.0) * theta * theta;
            score += c * s;
            hessian += c * (4.0 * quad - 4.0 * (theta - 0.5) * s - s * s);
        }
        Ok((score, hessian))
    }

    /// Summed φ-score without the Hessian.
    pub(crate) fn score_phi(&self, phi: f64) -> f64 {
        let theta = phi_to_theta(phi);
        let (a, b) = phi_log_probs(phi);
        2.0 * self.summed_centred(theta, a, b)
    }
}

/// `Σᵢ log Match(kᵢ | n, θ)`.
pub fn log_likelihood(data: &Dataset, theta: f64) -> Result<f64> {
    Likelihood::new(data).log_likelihood(theta)
}

/// Summed score and Hessian with respect to θ, for `0 < θ < 1`.
pub fn score_and_hessian_theta(data: &Dataset, theta: f64) -> Result<(f64, f64)> {
    Likelihood::new(data).score_hessian_theta(theta)
}

/// Summed score and Hessian with respect to `φ`, for finite `φ`.
pub fn score_and_hessian_phi(data: &Dataset, phi: f64) -> Result<(f64, f64)> {
    Likelihood::new(data).score_hessian_phi(phi)
}
