use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::LogProbVector;

/// A highest-density region: the support points with the largest mass,
/// accumulated until the requested coverage is reached.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HdrRegion {
    /// Region points in ascending order.
    pub points: Vec<usize>,
    /// Probability mass actually covered (at least `cover_prob`).
    pub coverage: f64,
    pub cover_prob: f64,
    /// Whether the points form an integer interval.
    pub contiguous: bool,
}

impl HdrRegion {
    /// `"1..7"` for an interval, `"0, 2"` otherwise.
    pub fn describe(&self) -> String {
        match (self.points.first(), self.points.last()) {
            (Some(lo), Some(hi)) if self.contiguous && lo != hi => format!("{lo}..{hi}"),
            _ => self
                .points
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(", "),
        }
    }
}

/// Greedy HDR: points in decreasing order of mass, ties to the smaller value.
pub(crate) fn greedy_hdr(log_pmf: &LogProbVector, cover_prob: f64) -> Result<HdrRegion> {
    if !(cover_prob > 0.0 && cover_prob < 1.0) {
        return Err(Error::InvalidLevel(cover_prob));
    }
    let values = log_pmf.as_slice();
    let mut order: Vec<usize> = (0..values.len())
        .filter(|&t| values[t] > f64::NEG_INFINITY)
        .collect();
    // Stable sort keeps ascending t among equal masses.
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let mut points = Vec::new();
    let mut coverage = 0.0;
    for t in order {
        points.push(t);
        coverage += values[t].exp();
        if coverage >= cover_prob {
            break;
        }
    }
    points.sort_unstable();
    let contiguous = points.windows(2).all(|w| w[1] == w[0] + 1);
    Ok(HdrRegion {
        points,
        coverage: coverage.min(1.0),
        cover_prob,
        contiguous,
    })
}
