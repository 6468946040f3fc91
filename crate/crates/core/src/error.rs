use std::fmt;

use serde::Serialize;

/// One side of the market together with an agent index (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Agent {
    Man(usize),
    Woman(usize),
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Agent::Man(i) => write!(f, "man {}", i + 1),
            Agent::Woman(j) => write!(f, "woman {}", j + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{agent} is indifferent between partners {} and {}", .pair.0 + 1, .pair.1 + 1)]
    TiesPresent { agent: Agent, pair: (usize, usize) },
    #[error("market data is malformed: {0}")]
    InvalidMarket(String),
    #[error("not a matching: {0}")]
    InvalidMatching(String),
    #[error("the matching is not NTU stable: man {} and woman {} block it", .man + 1, .woman + 1)]
    NotStable { man: usize, woman: usize },
    #[error("input matching to the lattice operation is not stable")]
    NotStableInput,
    #[error("matching is not a member of the stable set")]
    NotMember,
    #[error("market of size {n} exceeds the enumeration bound {limit}")]
    SizeLimit { n: usize, limit: usize },
    #[error("stable set has more than {limit} members")]
    StableSetTooLarge { limit: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("verdicts contradict the implication lattice: {0}")]
    ImplicationViolation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
