use thiserror::Error;

use crate::sim::SimTime;
use crate::units::{Address, TokenAmount};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("cannot schedule at {fire_at}, clock is already at {now}")]
    PastTime { fire_at: SimTime, now: SimTime },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LedgerError {
    #[error("{0} is not authorized for this call")]
    Unauthorized(Address),
    #[error("parameter {key} value {value} outside bounds [{min}, {max}]")]
    OutOfBounds { key: String, value: u64, min: u64, max: u64 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GovernanceError {
    #[error("{0} is not in the signer set")]
    NotASigner(Address),
    #[error("proposal {0} already executed")]
    AlreadyExecuted(u64),
    #[error("unknown proposal {0}")]
    UnknownProposal(u64),
    #[error("proposal {id} is {state}, expected {expected}")]
    WrongState { id: u64, state: String, expected: String },
    #[error("voting window for proposal {0} is closed")]
    VotingClosed(u64),
    #[error("voting window for proposal {0} is still open")]
    VotingOpen(u64),
    #[error("timelock for proposal {id} expires at {ready_at}")]
    TooEarly { id: u64, ready_at: SimTime },
    #[error("proposal {id} value is out of bounds: {reason}")]
    RejectedOutOfBounds { id: u64, reason: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("unknown feed {0}")]
    UnknownFeed(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VaultError {
    #[error("only {available} unlocked, {requested} requested")]
    InsufficientUnlocked { available: TokenAmount, requested: TokenAmount },
    #[error("unknown lock ticket {0}")]
    UnknownTicket(u64),
    #[error("withdrawal of {requested} not covered by a redemption ticket")]
    UncoveredWithdrawal { requested: TokenAmount },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExchangeError {
    #[error("trading is halted")]
    TradingHalted,
    #[error("{0} has not completed onboarding")]
    NotOnboarded(Address),
    #[error("order quantity must be positive")]
    ZeroQuantity,
    #[error("limit price must be positive")]
    ZeroPrice,
    #[error("one side of the book is empty")]
    EmptySide,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid scenario config: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown bundled scenario {0}")]
    UnknownScenario(String),
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("event log is empty or missing its header record")]
    MissingHeader,
    #[error("event log is missing its trailing digest record")]
    MissingTrailer,
    #[error("digest mismatch: expected {expected}, got {actual}")]
    DigestMismatch { expected: String, actual: String },
    #[error("malformed log line {line}: {source}")]
    Malformed { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Terminal failure states of user workflows.
#[derive(Debug, Error, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum WorkflowError {
    #[error("issuance frozen by risk control")]
    IssuanceFrozen,
    #[error("insufficient reserve headroom")]
    InsufficientReserveHeadroom,
    #[error("compliance blocked")]
    ComplianceBlocked,
    #[error("user has not completed onboarding")]
    NotOnboarded,
    #[error("insufficient balance")]
    InsufficientBalance,
    #[error("trading is halted")]
    TradingHalted,
    #[error("no liquidity")]
    NoLiquidity,
    #[error("transaction reverted: {0}")]
    Reverted(String),
}
