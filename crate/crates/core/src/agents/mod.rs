//! The four agents and the orchestrator that routes user workflows between them.

pub mod compliance;
pub mod issuance;
pub mod market_maker;
pub mod orchestrator;
pub mod risk;

pub use compliance::{ComplianceAgent, ComplianceConfig, ComplianceDecision, ComplianceOutcome, UserProfile};
pub use issuance::{BurnResult, IssuanceAgent, IssuanceConfig};
pub use market_maker::{MMConfig, MarketMaker, RebalanceAction};
pub use orchestrator::{ActionKind, Orchestrator, Workflow, WorkflowState};
pub use risk::{AlertKind, RiskAgent, RiskAlert, RiskConfig};
