//! The classical matching distribution: the number of fixed points of a
//! uniformly random permutation of `n` items.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{log_add_exp, log_factorial, LogProbVector, LogReal};

/// Size parameter. `Infinite` is a distinct value (the Poisson(1) limit), not
/// a large-`n` approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Size {
    Finite(usize),
    Infinite,
}

impl Size {
    pub fn finite(self) -> Option<usize> {
        match self {
            Size::Finite(n) => Some(n),
            Size::Infinite => None,
        }
    }
}

impl From<usize> for Size {
    fn from(n: usize) -> Self {
        Size::Finite(n)
    }
}

impl std::fmt::Display for Size {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Size::Finite(n) => write!(f, "{n}"),
            Size::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Ok(Size::Infinite),
            other => other
                .parse::<usize>()
                .map(Size::Finite)
                .map_err(|e| format!("invalid size {s:?}: {e}")),
        }
    }
}

/// Mean, variance, skewness and kurtosis (not excess). Skewness and kurtosis
/// are `None` when the variance is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
}

impl Moments {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Central moments from the first four raw moments.
    pub(crate) fn from_raw(raw: [f64; 4]) -> Self {
        let [m1, m2, m3, m4] = raw;
        let variance = m2 - m1 * m1;
        let third = m3 - 3.0 * m1 * m2 + 2.0 * m1.powi(3);
        let fourth = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
        Self::from_central(m1, variance, third, fourth)
    }

    pub(crate) fn from_central(mean: f64, variance: f64, third: f64, fourth: f64) -> Self {
        if variance > 0.0 {
            Self {
                mean,
                variance,
                skewness: Some(third / variance.powf(1.5)),
                kurtosis: Some(fourth / (variance * variance)),
            }
        } else {
            Self {
                mean,
                variance: 0.0,
                skewness: None,
                kurtosis: None,
            }
        }
    }
}

/// Log-pmfs of the classical matching distribution for every size `0..=max_size`.
///
/// Row `s` is a [`LogProbVector`] over `k = 0..=s`.
#[derive(Debug, Clone)]
pub struct ClassicalTable {
    rows: Vec<LogProbVector>,
}

impl ClassicalTable {
    /// Builds all rows with the descending log-space recursion
    ///
    /// `m(s) = -log s!`,
    /// `m(k) = log(k+1) - log(s-k) + logsumexp(log(s-k-1) + m(k+1), log(k+2) + m(k+2))`,
    ///
    /// followed by renormalization of each row.
    pub fn build(max_size: usize) -> Self {
        let logs: Vec<f64> = (0..=max_size + 2).map(|i| (i as f64).ln()).collect();
        let rows = (0..=max_size)
            .map(|s| {
                let mut row = vec![f64::NEG_INFINITY; s + 1];
                row[s] = -log_factorial(s);
                for k in (0..s).rev() {
                    let first = logs[s - k - 1] + row[k + 1];
                    let second = if k + 1 < s {
                        logs[k + 2] + row[k + 2]
                    } else {
                        f64::NEG_INFINITY
                    };
                    row[k] = logs[k + 1] - logs[s - k] + log_add_exp(first, second);
                }
                LogProbVector::normalized(row).expect("classical row has positive mass at s")
            })
            .collect();
        Self { rows }
    }

    pub fn max_size(&self) -> usize {
        self.rows.len() - 1
    }

    /// Row for size `s`. Panics if `s > max_size`.
    pub fn row(&self, size: usize) -> &LogProbVector {
        &self.rows[size]
    }

    /// `log Match(k | size)`, `-inf` for `k > size`.
    pub fn log_pmf(&self, k: usize, size: usize) -> LogReal {
        self.rows[size].get(k)
    }

    pub fn pmf(&self, k: usize, size: usize) -> f64 {
        self.log_pmf(k, size).exp()
    }

    /// Absolute residual of
    /// `Match(k|n+1) = (n-k)/(n-k+1) Match(k|n) + (k+1)/(n-k+1) Match(k+1|n)`.
    /// Requires `n + 1 <= max_size`.
    pub fn size_recursion_residual(&self, k: usize, n: usize) -> Result<f64> {
        if k > n {
            return Err(Error::OutsideSupport { k, n });
        }
        if n + 1 > self.max_size() {
            return Err(Error::Domain(format!(
                "table of size {} cannot check size {}",
                self.max_size(),
                n + 1
            )));
        }
        let denom = (n - k + 1) as f64;
        let lhs = self.pmf(k, n + 1);
        let rhs =
            (n - k) as f64 / denom * self.pmf(k, n) + (k + 1) as f64 / denom * self.pmf(k + 1, n);
        Ok((lhs - rhs).abs())
    }
}

/// Residual of the size recursion at `(k, n)`, building a fresh table.
pub fn size_recursion_residual(k: usize, n: usize) -> Result<f64> {
    ClassicalTable::build(n + 1).size_recursion_residual(k, n)
}

/// `log Pois(k | mean)`; `mean = 0` is a point mass at zero.
pub fn log_poisson_pmf(k: usize, mean: f64) -> LogReal {
    if mean == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mean + k as f64 * mean.ln() - log_factorial(k)
}

/// Direct evaluation of `Match(k|n) = (1/k!) Σ_{i=0}^{n-k} (-1)^i / i!`.
///
/// Cross-check path only; the alternating sum loses precision for large `n`.
pub fn classical_pmf_explicit(k: usize, size: Size) -> Result<f64> {
    let inv_k_factorial: f64 = (1..=k).map(|j| 1.0 / j as f64).product();
    match size {
        Size::Infinite => Ok((-1.0f64).exp() * inv_k_factorial),
        Size::Finite(n) => {
            if k > n {
                return Err(Error::OutsideSupport { k, n });
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            for i in 1..=(n - k) {
                term *= -1.0 / i as f64;
                sum += term;
            }
            Ok(inv_k_factorial * sum)
        }
    }
}

/// Row `r` of the Stirling numbers of the second kind, `S(r, 0..=r)`.
///
/// Exact integer arithmetic up to `r = 20`, floating point beyond.
pub fn stirling_second_kind_row(r: usize) -> Vec<f64> {
    const EXACT_LIMIT: usize = 20;
    let exact_rows = r.min(EXACT_LIMIT);
    let mut row: Vec<u128> = vec![1];
    for i in 1..=exact_rows {
        let mut next = vec![0u128; i + 1];
        for j in 1..=i {
            let carry = if j < i { j as u128 * row[j] } else { 0 };
            next[j] = carry + row[j - 1];
        }
        row = next;
    }
    let mut row: Vec<f64> = row.into_iter().map(|v| v as f64).collect();
    for i in (exact_rows + 1)..=r {
        let mut next = vec![0.0; i + 1];
        for j in 1..=i {
            let carry = if j < i { j as f64 * row[j] } else { 0.0 };
            next[j] = carry + row[j - 1];
        }
        row = next;
    }
    row
}

/// `E(K^r) = Σ_{i=0}^{min(r,n)} S(r, i)`; the Bell number `B_r` once `r <= n`.
pub fn classical_raw_moment(r: usize, size: Size) -> f64 {
    let row = stirling_second_kind_row(r);
    let upper = match size {
        Size::Finite(n) => r.min(n),
        Size::Infinite => r,
    };
    row[..=upper].iter().sum()
}

/// Mean, variance, skewness and kurtosis of `Match(·|n)`, derived from the
/// Stirling-sum raw moments. Skewness and kurtosis are `None` for `n <= 1`.
pub fn classical_central_moments(size: Size) -> Moments {
    let raw = [1, 2, 3, 4].map(|r| classical_raw_moment(r, size));
    Moments::from_raw(raw)
}

/// `m_K(t) = Σ_{i=0}^{n} (e^t - 1)^i / i!`; `exp(e^t - 1)` when `n` is infinite.
pub fn classical_mgf(t: f64, size: Size) -> f64 {
    let x = t.exp_m1();
    match size {
        Size::Infinite => x.exp(),
        Size::Finite(n) => {
            let mut term = 1.0;
            let mut sum = 1.0;
            for i in 1..=n {
                term *= x / i as f64;
                sum += term;
            }
            sum
        }
    }
}

/// `Σ_k (Match(k|n) - Pois(k|1))^2`, truncating the Poisson tail at `upper`.
pub fn poisson_sse(table: &ClassicalTable, n: usize, upper: usize) -> f64 {
    (0..=upper.max(n))
        .map(|k| {
            let diff = table.pmf(k, n) - log_poisson_pmf(k, 1.0).exp();
            diff * diff
        })
        .sum()
}
