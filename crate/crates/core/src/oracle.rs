//! Brute-force reference distributions for testing: exhaustive permutation
//! enumeration and direct two-step simulation. These paths share no pmf code
//! with the production recursions and are deliberately naive.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::check_probability;

/// Largest size accepted by the enumerators (`9! = 362880` permutations).
pub const MAX_ENUMERATION_SIZE: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactDistribution {
    /// Permutation counts per number of fixed points, when the distribution
    /// came from pure enumeration.
    pub counts: Option<Vec<u64>>,
    /// Probabilities over `0..=n`.
    pub probabilities: Vec<f64>,
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_ENUMERATION_SIZE {
        Err(Error::EnumerationTooLarge(n))
    } else {
        Ok(())
    }
}

fn fixed_points(perm: &[usize]) -> usize {
    perm.iter().enumerate().filter(|(i, &x)| *i == x).count()
}

/// Visits every permutation of `0..n` (iterative Heap's algorithm).
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Fixed-point counts over all `n!` permutations.
pub fn classical_counts(n: usize) -> Result<Vec<u64>> {
    check_size(n)?;
    let mut counts = vec![0u64; n + 1];
    for_each_permutation(n, |p| counts[fixed_points(p)] += 1);
    Ok(counts)
}

/// Classical matching distribution by enumerating every permutation.
pub fn enumerate_classical(n: usize) -> Result<ExactDistribution> {
    let counts = classical_counts(n)?;
    let total: u64 = counts.iter().sum();
    let probabilities = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(ExactDistribution {
        counts: Some(counts),
        probabilities,
    })
}

fn binomial_coefficient(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

/// Mixture `Σ_ℓ C(n, ℓ) θ^ℓ (1-θ)^(n-ℓ) · shift(classical(n - ℓ), ℓ)` with
/// every classical component enumerated.
pub fn enumerate_generalised(n: usize, theta: f64) -> Result<ExactDistribution> {
    check_size(n)?;
    check_probability(theta)?;
    let mut probabilities = vec![0.0; n + 1];
    for l in 0..=n {
        let weight = binomial_coefficient(n, l) as f64
            * theta.powi(l as i32)
            * (1.0 - theta).powi((n - l) as i32);
        if weight == 0.0 {
            continue;
        }
        let inner = enumerate_classical(n - l)?;
        for (j, p) in inner.probabilities.iter().enumerate() {
            probabilities[l + j] += weight * p;
        }
    }
    Ok(ExactDistribution {
        counts: None,
        probabilities,
    })
}

/// A uniformly random permutation of `0..n`.
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// One game: each item is known with probability θ and placed correctly; the
/// unknown items are shuffled among the unknown positions.
fn play_once<R: Rng + ?Sized>(n: usize, theta: f64, rng: &mut R) -> usize {
    let known: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < theta).collect();
    let unknown: Vec<usize> = (0..n).filter(|&i| !known[i]).collect();
    let mut placed = unknown.clone();
    placed.shuffle(rng);
    let random_matches = unknown.iter().zip(&placed).filter(|(a, b)| a == b).count();
    (n - unknown.len()) + random_matches
}

/// Empirical distribution of total matches over `m` games, from `reps`
/// independent replications. Returns counts over `0..=n·m`.
pub fn simulate_two_step<R: Rng + ?Sized>(
    n: usize,
    theta: f64,
    m: usize,
    reps: usize,
    rng: &mut R,
) -> Result<Vec<u64>> {
    check_probability(theta)?;
    if reps == 0 {
        return Err(Error::Domain(
            "simulation needs at least one replication".into(),
        ));
    }
    let mut counts = vec![0u64; n * m + 1];
    for _ in 0..reps {
        let total: usize = (0..m).map(|_| play_once(n, theta, rng)).sum();
        counts[total] += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_classical(0).unwrap().probabilities, vec![1.0]);
        assert_eq!(
            enumerate_classical(2).unwrap().probabilities,
            vec![0.5, 0.0, 0.5]
        );
        assert_eq!(classical_counts(3).unwrap(), vec![2, 3, 0, 1]);
        assert_eq!(classical_counts(4).unwrap(), vec![9, 8, 6, 0, 1]);
        let total: u64 = classical_counts(9).unwrap().iter().sum();
        assert_eq!(total, 362_880);
        assert!(enumerate_classical(10).is_err());
    }

    #[test]
    fn generalised_mixtures() {
        let d = enumerate_generalised(2, 0.5).unwrap();
        assert_eq!(d.probabilities, vec![0.125, 0.0, 0.875]);
        assert_eq!(
            enumerate_generalised(5, 0.0).unwrap().probabilities,
            enumerate_classical(5).unwrap().probabilities
        );
        let d = enumerate_generalised(6, 1.0).unwrap();
        assert_eq!(d.probabilities, vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn shuffle_is_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let reps = 1_000_000;
        let mut freq: HashMap<Vec<usize>, u64> = HashMap::new();
        for _ in 0..reps {
            *freq.entry(random_permutation(4, &mut rng)).or_default() += 1;
        }
        assert_eq!(freq.len(), 24);
        let p = 1.0 / 24.0;
        let sd = (reps as f64 * p * (1.0 - p)).sqrt();
        for (perm, &c) in &freq {
            let z = (c as f64 - reps as f64 * p) / sd;
            assert!(z.abs() < 5.0, "{perm:?}: z = {z}");
        }
    }

    #[test]
    fn simulation_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let counts = simulate_two_step(5, 1.0, 3, 100, &mut rng).unwrap();
        assert_eq!(counts[15], 100);
        let counts = simulate_two_step(2, 0.0, 1, 100_000, &mut rng).unwrap();
        let p0 = counts[0] as f64 / 100_000.0;
        assert!((p0 - 0.5).abs() < 0.006);
        assert_eq!(counts[1], 0);
        assert!(simulate_two_step(3, 0.5, 1, 0, &mut rng).is_err());
    }
}
