use thiserror::Error;

use crate::money::Money;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("tick size must be positive")]
    ZeroTick,
    #[error("{pence} pence is not a whole number of {tick}-pence ticks")]
    OffGrid { pence: u64, tick: u32 },
    #[error("tick grids differ: {left} vs {right} pence per tick")]
    Mismatch { left: u32, right: u32 },
    #[error("cannot parse amount {0:?}")]
    Unparseable(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProfileError {
    #[error("a value profile needs at least one buyer and one seller")]
    EmptySide,
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EconomyError {
    #[error("{side} CDF must be 0 at {lower} and 1 at {upper}")]
    Endpoints {
        side: &'static str,
        lower: f64,
        upper: f64,
    },
    #[error("{side} CDF is not strictly increasing near {at}")]
    NotIncreasing { side: &'static str, at: f64 },
    #[error("piecewise-linear CDF needs increasing knots and CDF values from 0 to 1")]
    BadKnots,
    #[error("excess demand has no sign change on [{lower}, {upper}]")]
    NoSignChange { lower: f64, upper: f64 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShiftError {
    #[error("value {0} is missing from the shift map")]
    MissingValue(Money),
    #[error("epsilon bounds must be positive")]
    NonPositiveEpsilon,
    #[error("shift is invalid: {0} violation(s)")]
    Invalid(usize),
    #[error("shift side does not match: expected {expected}")]
    WrongSide { expected: &'static str },
    #[error("infeasible shift parameters: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("trader {0} is not active")]
    InactiveTrader(u32),
    #[error("unknown trader {0}")]
    UnknownTrader(u32),
    #[error("trader {trader} cannot {action}")]
    WrongSide { trader: u32, action: &'static str },
    #[error("no standing {0} to accept")]
    NoStandingQuote(&'static str),
    #[error("round exceeded the ceiling of {0} offers")]
    OfferCeiling(u64),
    #[error("queue mode needs at least {need} queued traders per side, found {found}")]
    QueueTooShort { need: usize, found: usize },
    #[error("{0} agents supplied for {1} traders")]
    AgentCount(usize, usize),
    #[error("seller cost {cost} exceeds the maximum ask {max_ask}")]
    CostAboveMaxAsk { cost: Money, max_ask: Money },
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("trade {index} references a {side} value {value} absent from the profile")]
    UnknownValue {
        index: usize,
        side: &'static str,
        value: Money,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("sample too small: need at least {need}, got {got}")]
    TooSmall { need: usize, got: usize },
    #[error("zero variance with a nonzero mean difference of {mean_difference} (exact shift)")]
    ZeroVariance { mean_difference: f64 },
    #[error("non-finite observation")]
    NonFinite,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: field `{key}`: {message}")]
    Field {
        line: usize,
        key: String,
        message: String,
    },
    #[error("treatment `{name}`: missing field `{key}`")]
    Missing { name: String, key: &'static str },
    #[error("unknown treatment `{0}`")]
    UnknownTreatment(String),
    #[error("treatment `{name}`: {message}")]
    Invalid { name: String, message: String },
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing or malformed header line (expected `# tick_size=...`)")]
    Header,
    #[error(transparent)]
    Grid(#[from] GridError),
}
