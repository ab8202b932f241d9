//! Classical and generalised matching distributions.
//!
//! In the classical matching problem `n` items are randomly permuted and `K`
//! counts the items left in place. The generalised distribution lets each item
//! be placed correctly by knowledge with probability `θ` before the remaining
//! items are permuted at random. This crate computes pmfs, cdfs, quantiles,
//! moments and highest-density regions for both, totals over repeated games,
//! likelihood-based inference for `θ`, and the matching test with its power.
//!
//! All probability arithmetic runs in log space.

pub mod classical;
pub mod error;
pub mod generalised;
pub mod hypothesis;
pub mod inference;
pub mod numerics;
pub mod oracle;

pub use classical::{ClassicalTable, Moments, Size};
pub use error::{Error, Result};
pub use generalised::{ApproxMode, GmdDistribution, GmdParams, HdrRegion, Method};
pub use hypothesis::{matching_test, Alternative, TestResult};
pub use inference::Dataset;
pub use numerics::{LogProbVector, LogReal};
