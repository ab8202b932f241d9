use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty log-sum")]
    EmptyLogSum,

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("count {k} is outside the support 0..={n}")]
    OutsideSupport { k: usize, n: usize },

    #[error("distribution is a point-mass on infinity (infinite size with positive matching probability)")]
    PointMassAtInfinity,

    #[error("number of trials must be at least one")]
    ZeroTrials,

    #[error("observation {k} is impossible for size {n}")]
    InvalidObservation { k: usize, n: usize },

    #[error("dataset contains no observations")]
    EmptyDataset,

    #[error("probability parameter is not identifiable for size {0}; need size >= 2")]
    NotIdentifiable(usize),

    #[error("MOM undefined for size {0}; need size > 1")]
    MomUndefined(usize),

    #[error("score and Hessian are undefined at the boundary theta = {0}; use one-sided limits")]
    BoundaryParameter(f64),

    #[error("observed information is not positive at the MLE; use the bootstrap interval instead")]
    SingularInformation,

    #[error("MLE iteration did not converge (last phi = {phi}, score = {score})")]
    NonConvergence { phi: f64, score: f64 },

    #[error("null probability must be below one; a null of theta = 1 is degenerate")]
    DegenerateNull,

    #[error("significance level {0} is outside (0, 1)")]
    InvalidLevel(f64),

    #[error("size {0} is too large for exhaustive enumeration (limit 9)")]
    EnumerationTooLarge(usize),

    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
