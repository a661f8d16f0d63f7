use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the range where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The median-bias parameter leaves no finite split count.
    #[error("infinite splits required: no finite B satisfies the miscoverage target at delta = {delta}")]
    InfiniteSplits { delta: f64 },

    #[error("more splits than rows: cannot split {n} rows into {b} splits")]
    MoreSplitsThanRows { n: usize, b: usize },

    #[error(
        "infeasible split: {n} rows cannot give {b} splits of at least {min_split_size} rows each (needs n >= {})",
        b * min_split_size
    )]
    InfeasibleSplit {
        n: usize,
        b: usize,
        min_split_size: usize,
    },

    #[error("estimator `{name}` failed: {reason}")]
    Estimator { name: String, reason: String },

    #[error("estimator failed on subsample {index}: {source}")]
    Subsample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("median-bias estimate {delta_hat:.4} exceeds cap {cap}; consider the unimodal method")]
    DeltaClipped { delta_hat: f64, cap: f64 },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("unknown {kind} `{name}`; known: {known}")]
    Unknown {
        kind: &'static str,
        name: String,
        known: String,
    },
}

impl Error {
    /// Stable machine-readable label.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InfiniteSplits { .. } => "infinite-splits",
            Error::MoreSplitsThanRows { .. } => "more-splits-than-rows",
            Error::InfeasibleSplit { .. } => "infeasible-split",
            Error::Estimator { .. } => "estimator",
            Error::Subsample { .. } => "subsample",
            Error::DeltaClipped { .. } => "delta-clipped",
            Error::Data(_) => "data",
            Error::Unknown { .. } => "unknown-name",
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn estimator(name: &str, reason: impl Into<String>) -> Self {
        Error::Estimator {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
