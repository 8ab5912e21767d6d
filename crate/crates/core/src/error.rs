use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("instance too large for exhaustive search: {goods} goods exceeds the cap of {cap}")]
    TooLarge { goods: usize, cap: usize },

    #[error("bundles overlap on good {0}")]
    OverlappingBundles(usize),

    #[error("good index {index} out of range for {goods} goods")]
    GoodOutOfRange { index: usize, goods: usize },

    #[error("agent index {agent} out of range for {agents} agents")]
    AgentOutOfRange { agent: usize, agents: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The agent values every good at zero, so no positive share exists.
    #[error("agent has an all-zero valuation")]
    DegenerateValuation,

    /// A construction that is guaranteed to succeed under its preconditions did not.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("bag-filling prefix containment violated at round {round} for agent {agent}")]
    PrefixContainment { round: usize, agent: usize },
}
