use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point has zero dimensions")]
    ZeroDimension,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("length mismatch: {points} points but {weights} weights")]
    LengthMismatch { points: usize, weights: usize },

    #[error("center set is empty")]
    EmptyCenters,

    #[error("point set is empty")]
    EmptyInput,

    #[error("total weight is not positive")]
    ZeroTotalWeight,

    #[error("negative weight where only nonnegative weights are allowed")]
    NegativeWeight,

    #[error("all local costs are zero")]
    AllLocalCostsZero,

    #[error("site {site}: {samples} samples requested but the sampling mass is zero")]
    InconsistentPlan { site: usize, samples: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what}: gave up after {attempts} attempts")]
    RetryExhausted { what: &'static str, attempts: usize },

    #[error("grid {rows}x{cols} does not have {n} sites")]
    GridNotFactorable { n: usize, rows: usize, cols: usize },

    #[error("graph is not connected")]
    Disconnected,

    #[error("input too large for exhaustive search: {got} points (limit {limit})")]
    TooLarge { limit: usize, got: usize },

    #[error("every candidate center set was degenerate")]
    AllCandidatesDegenerate,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
