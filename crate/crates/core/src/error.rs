use thiserror::Error;

#[derive(Debug, Error)]
pub enum ZrpError {
    #[error("rate table is empty")]
    EmptyRateTable,
    #[error("rate table entry {index} is not positive and finite: {value}")]
    NonPositiveRate { index: usize, value: f64 },
    #[error("rate table is not nondecreasing at entry {index}")]
    NonMonotoneRate { index: usize },
    #[error("unknown rate preset `{0}`")]
    UnknownPreset(String),

    #[error("argument `{name}` out of domain: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("configurations are not coordinatewise ordered at site {site}")]
    OrderViolation { site: usize },
    #[error("particle counts differ: {left} vs {right}")]
    ParticleCountMismatch { left: u64, right: u64 },

    #[error("state space has {size} states, above the cap of {cap}")]
    StateSpaceTooLarge { size: u128, cap: usize },
    #[error("configuration is not a state of this chain")]
    UnknownState,

    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, ZrpError>;

pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> ZrpError {
    ZrpError::Domain {
        name,
        reason: reason.into(),
    }
}
