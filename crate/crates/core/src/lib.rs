//! Deterministic discrete-event simulator of a gold-backed token exchange
//! operated by four cooperating agents (compliance, issuance, market making
//! and risk control) on top of a simulated chain.

pub mod agents;
pub mod error;
pub mod exchange;
pub mod governance;
pub mod harness;
pub mod ledger;
pub mod oracle;
pub mod sim;
pub mod units;
pub mod vault;
