//! Workflow routing and bookkeeping for user actions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::WorkflowError;
use crate::sim::{EventLog, SimTime};
use crate::units::{Address, TokenAmount};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Onboard,
    Buy,
    Sell,
    Issue,
    Redeem,
}

impl ActionKind {
    pub const ALL: [ActionKind; 5] =
        [ActionKind::Onboard, ActionKind::Buy, ActionKind::Sell, ActionKind::Issue, ActionKind::Redeem];

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::Onboard => "onboard",
            ActionKind::Buy => "buy",
            ActionKind::Sell => "sell",
            ActionKind::Issue => "issue",
            ActionKind::Redeem => "redeem",
        }
    }

    /// Whether the action needs a completed onboarding.
    pub fn gated(self) -> bool {
        self != ActionKind::Onboard
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkflowState {
    Screening,
    Compliance,
    Processing,
    Matching,
    AwaitingBlock,
    Completed,
    Failed(WorkflowError),
}

impl WorkflowState {
    pub fn is_terminal(&self) -> bool {
        matches!(self, WorkflowState::Completed | WorkflowState::Failed(_))
    }

    fn name(&self) -> &'static str {
        match self {
            WorkflowState::Screening => "screening",
            WorkflowState::Compliance => "compliance",
            WorkflowState::Processing => "processing",
            WorkflowState::Matching => "matching",
            WorkflowState::AwaitingBlock => "awaiting_block",
            WorkflowState::Completed => "completed",
            WorkflowState::Failed(_) => "failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Workflow {
    pub id: u64,
    pub user: Address,
    pub kind: ActionKind,
    pub amount: TokenAmount,
    pub created_at: SimTime,
    pub state: WorkflowState,
    /// Set on completion: time from request to on-chain confirmation.
    pub latency_ms: Option<u64>,
    /// Time spent before the first ledger submission.
    pub agent_ms: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KindStats {
    pub completed: u64,
    pub failed: BTreeMap<String, u64>,
    pub latencies_ms: Vec<u64>,
    pub agent_ms: Vec<u64>,
}

/// Owns every live workflow. Terminal workflows are folded into per-kind
/// statistics and dropped. Transitions are logged when `verbose` is set.
#[derive(Debug, Default)]
pub struct Orchestrator {
    next_id: u64,
    live: BTreeMap<u64, Workflow>,
    stats: BTreeMap<ActionKind, KindStats>,
    verbose: bool,
    warmup: SimTime,
}

impl Orchestrator {
    pub fn new(verbose: bool) -> Self {
        Orchestrator { verbose, ..Default::default() }
    }

    pub fn open(&mut self, user: Address, kind: ActionKind, amount: TokenAmount, now: SimTime, log: &mut EventLog) -> u64 {
        self.next_id += 1;
        let id = self.next_id;
        self.live.insert(
            id,
            Workflow {
                id,
                user,
                kind,
                amount,
                created_at: now,
                state: WorkflowState::Screening,
                latency_ms: None,
                agent_ms: None,
            },
        );
        if self.verbose {
            log.emit(
                now,
                "orchestrator",
                "workflow_open",
                serde_json::json!({"id": id, "user": user, "action": kind.name(), "amount": amount}),
            );
        }
        id
    }

    /// Latencies of workflows opened before `warmup` are not sampled.
    pub fn with_warmup(mut self, warmup: SimTime) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn get(&self, id: u64) -> Option<&Workflow> {
        self.live.get(&id)
    }

    pub fn live(&self) -> usize {
        self.live.len()
    }

    pub fn advance(&mut self, id: u64, state: WorkflowState, now: SimTime, log: &mut EventLog) {
        let Some(w) = self.live.get_mut(&id) else { return };
        if state == WorkflowState::AwaitingBlock && w.agent_ms.is_none() {
            w.agent_ms = Some(now.since(w.created_at));
        }
        if self.verbose {
            log.emit(now, "orchestrator", "workflow_state", serde_json::json!({"id": id, "state": state.name()}));
        }
        w.state = state;
    }

    /// Finalizes a workflow; returns it for callers that need its fields.
    pub fn finish(&mut self, id: u64, result: Result<(), WorkflowError>, now: SimTime, log: &mut EventLog) -> Option<Workflow> {
        let mut w = self.live.remove(&id)?;
        let stats = self.stats.entry(w.kind).or_default();
        let detail = match &result {
            Ok(()) => {
                let latency = now.since(w.created_at);
                w.latency_ms = Some(latency);
                w.state = WorkflowState::Completed;
                stats.completed += 1;
                if w.created_at >= self.warmup {
                    stats.latencies_ms.push(latency);
                    if let Some(a) = w.agent_ms {
                        stats.agent_ms.push(a);
                    }
                }
                serde_json::json!({"id": id, "user": w.user, "action": w.kind.name(), "amount": w.amount, "latency_ms": latency})
            }
            Err(e) => {
                *stats.failed.entry(format!("{e:?}").split('(').next().unwrap_or("").to_string()).or_default() += 1;
                w.state = WorkflowState::Failed(e.clone());
                serde_json::json!({"id": id, "user": w.user, "action": w.kind.name(), "amount": w.amount, "error": e.to_string()})
            }
        };
        let kind = if result.is_ok() { "workflow_done" } else { "workflow_failed" };
        log.emit(now, "orchestrator", kind, detail);
        Some(w)
    }

    pub fn stats(&self) -> &BTreeMap<ActionKind, KindStats> {
        &self.stats
    }

    pub fn stats_for(&self, kind: ActionKind) -> KindStats {
        self.stats.get(&kind).cloned().unwrap_or_default()
    }
}
