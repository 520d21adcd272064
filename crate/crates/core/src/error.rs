use thiserror::Error;

use crate::bundle::Bundle;
use crate::value::{Overflow, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Overflow(#[from] Overflow),

    #[error("number of goods {goods} outside the supported range 0..={max}")]
    GoodsOutOfRange { goods: usize, max: usize },

    #[error("{goods} goods exceeds the limit of {limit} for this operation")]
    TooLarge { goods: usize, limit: usize },

    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("valuations disagree on the number of goods ({left} vs {right})")]
    GoodsMismatch { left: usize, right: usize },

    #[error("v(∅) must be 0, found {0}")]
    NonzeroEmpty(Value),

    #[error("interaction function must vanish on bundles of size <= 1, but θ({bundle}) = {value}")]
    InteractionNotZero { bundle: Bundle, value: Value },

    #[error("negative entry {value} at position {index}")]
    Negative { index: usize, value: Value },

    #[error("non-integer value {value} at {bundle}")]
    NonInteger { bundle: Bundle, value: Value },

    #[error("level {level} outside {min}..={max}")]
    LevelOutOfRange { level: usize, min: usize, max: usize },

    #[error("F4 fails at A={base} with goods {goods:?}")]
    F4Violation { base: Bundle, goods: [usize; 4] },

    #[error("iteration cap {cap} reached in phase {level}")]
    IterationCap { level: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("valuation is not a substitute valuation")]
    NotSubstitute,

    #[error("witness not constructible: {0}")]
    NotConstructible(String),

    #[error("inconsistent data: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
