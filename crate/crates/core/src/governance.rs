//! Multi-signature agent updates and time-locked, quorum-gated parameter votes.
//!
//! Governance state lives inside the ledger and is only mutated by
//! [`GovAction`] transactions executed during block production.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GovernanceError;
use crate::ledger::params::{ParamKey, ParamStore};
use crate::sim::SimTime;
use crate::units::{Address, Ppm, TokenAmount};

pub use crate::ledger::params::BoundsRegistry;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GovernanceConfig {
    pub signers_required: usize,
    pub signers: Vec<Address>,
    pub timelock_ms: u64,
    pub voting_period_ms: u64,
    pub quorum: f64,
    /// How long a passed proposal stays executable after its timelock.
    pub execution_grace_ms: u64,
}

impl Default for GovernanceConfig {
    fn default() -> Self {
        GovernanceConfig {
            signers_required: 2,
            signers: (0..3).map(Address::signer).collect(),
            timelock_ms: 24 * 3_600_000,
            voting_period_ms: 12 * 3_600_000,
            quorum: 0.4,
            execution_grace_ms: 72 * 3_600_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum UpdatePayload {
    /// Switches a named agent to another strategy-parameter set.
    AgentUpdate { agent: String, version: String },
    /// Lifts a breaker halt before its cooldown expires.
    Unpause,
    /// Clears the risk agent's reserve-shortfall alert.
    ClearReserveFreeze,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateStatus {
    Pending { signatures: usize },
    Executable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultisigProposal {
    pub id: u64,
    pub payload: UpdatePayload,
    pub signers_required: usize,
    pub signer_set: BTreeSet<Address>,
    pub signatures: BTreeSet<Address>,
    pub executed: bool,
}

impl MultisigProposal {
    pub fn new(id: u64, payload: UpdatePayload, signers_required: usize, signer_set: impl IntoIterator<Item = Address>) -> Self {
        MultisigProposal {
            id,
            payload,
            signers_required,
            signer_set: signer_set.into_iter().collect(),
            signatures: BTreeSet::new(),
            executed: false,
        }
    }

    pub fn sign_update(&mut self, signer: Address) -> Result<UpdateStatus, GovernanceError> {
        if self.executed {
            return Err(GovernanceError::AlreadyExecuted(self.id));
        }
        if !self.signer_set.contains(&signer) {
            return Err(GovernanceError::NotASigner(signer));
        }
        self.signatures.insert(signer);
        Ok(self.status())
    }

    pub fn status(&self) -> UpdateStatus {
        if self.signatures.len() >= self.signers_required {
            UpdateStatus::Executable
        } else {
            UpdateStatus::Pending { signatures: self.signatures.len() }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProposalState {
    Open,
    Passed,
    Rejected,
    Executed,
    Expired,
}

impl fmt::Display for ProposalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamProposal {
    pub id: u64,
    pub param_key: ParamKey,
    pub new_value: u64,
    pub proposer: Address,
    pub proposed_at: SimTime,
    pub voting_period_ms: u64,
    pub timelock_ms: u64,
    pub quorum: Ppm,
    pub votes_for: u64,
    pub votes_against: u64,
    pub total_power: u64,
    pub state: ProposalState,
    power_snapshot: BTreeMap<Address, u64>,
    voted: BTreeSet<Address>,
}

/// Quorum and strict-majority rule shared by every tally.
pub fn tally(votes_for: u64, votes_against: u64, quorum: Ppm, total_power: u64) -> ProposalState {
    let turnout = (votes_for as u128 + votes_against as u128) * 1_000_000;
    let needed = quorum.0 as u128 * total_power as u128;
    if total_power > 0 && turnout >= needed && votes_for > votes_against {
        ProposalState::Passed
    } else {
        ProposalState::Rejected
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExecResult {
    Executed { key: ParamKey, old: u64, new: u64 },
}

impl ParamProposal {
    pub fn ready_at(&self) -> SimTime {
        self.proposed_at + self.timelock_ms
    }

    pub fn voting_closes_at(&self) -> SimTime {
        self.proposed_at + self.voting_period_ms
    }

    pub fn vote(&mut self, voter: Address, support: bool, now: SimTime) -> Result<u64, GovernanceError> {
        if self.state != ProposalState::Open {
            return Err(self.wrong_state("Open"));
        }
        if now >= self.voting_closes_at() {
            return Err(GovernanceError::VotingClosed(self.id));
        }
        let power = self.power_snapshot.get(&voter).copied().unwrap_or(0);
        if power == 0 || !self.voted.insert(voter) {
            return Ok(0);
        }
        if support {
            self.votes_for += power;
        } else {
            self.votes_against += power;
        }
        Ok(power)
    }

    pub fn tally(&mut self, now: SimTime) -> Result<ProposalState, GovernanceError> {
        if self.state != ProposalState::Open {
            return Err(self.wrong_state("Open"));
        }
        if now < self.voting_closes_at() {
            return Err(GovernanceError::VotingOpen(self.id));
        }
        self.state = tally(self.votes_for, self.votes_against, self.quorum, self.total_power);
        Ok(self.state)
    }

    pub fn execute_param(
        &mut self,
        now: SimTime,
        params: &mut ParamStore,
        attested_reserve: TokenAmount,
    ) -> Result<ExecResult, GovernanceError> {
        if self.state != ProposalState::Passed {
            return Err(self.wrong_state("Passed"));
        }
        if now < self.ready_at() {
            return Err(GovernanceError::TooEarly { id: self.id, ready_at: self.ready_at() });
        }
        match params.set(self.param_key, self.new_value, attested_reserve) {
            Ok(old) => {
                self.state = ProposalState::Executed;
                Ok(ExecResult::Executed { key: self.param_key, old, new: self.new_value })
            }
            Err(e) => {
                self.state = ProposalState::Rejected;
                Err(GovernanceError::RejectedOutOfBounds { id: self.id, reason: e.to_string() })
            }
        }
    }

    fn wrong_state(&self, expected: &str) -> GovernanceError {
        GovernanceError::WrongState { id: self.id, state: self.state.to_string(), expected: expected.into() }
    }
}

/// Governance actions carried by ledger transactions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum GovAction {
    ProposeParam { key: ParamKey, value: u64 },
    Vote { proposal: u64, support: bool },
    Tally { proposal: u64 },
    Execute { proposal: u64 },
    ProposeUpdate { payload: UpdatePayload },
    SignUpdate { proposal: u64 },
}

/// What a governance transaction changed, for the on-chain event stream.
#[derive(Clone, Debug, PartialEq)]
pub enum GovOutcome {
    Proposed { id: u64 },
    Voted { id: u64, power: u64 },
    Tallied { id: u64, state: ProposalState },
    ParamChanged { id: u64, key: ParamKey, old: u64, new: u64 },
    OutOfBounds { id: u64, key: ParamKey, value: u64, reason: String },
    UpdateSigned { id: u64, status: UpdateStatus },
    UpdateApproved { id: u64, payload: UpdatePayload },
}

#[derive(Clone, Debug, Default)]
pub struct Governance {
    config: GovernanceConfig,
    params: BTreeMap<u64, ParamProposal>,
    updates: BTreeMap<u64, MultisigProposal>,
    next_id: u64,
}

impl Governance {
    pub fn new(config: GovernanceConfig) -> Self {
        Governance { config, params: BTreeMap::new(), updates: BTreeMap::new(), next_id: 1 }
    }

    pub fn config(&self) -> &GovernanceConfig {
        &self.config
    }

    pub fn param_proposal(&self, id: u64) -> Option<&ParamProposal> {
        self.params.get(&id)
    }

    pub fn update_proposal(&self, id: u64) -> Option<&MultisigProposal> {
        self.updates.get(&id)
    }

    fn alloc_id(&mut self) -> u64 {
        let id = self.next_id.max(1);
        self.next_id = id + 1;
        id
    }

    /// Voting power is the proposer-time snapshot of OZ balances.
    pub fn propose_param(
        &mut self,
        proposer: Address,
        key: ParamKey,
        value: u64,
        now: SimTime,
        balances: &BTreeMap<Address, TokenAmount>,
    ) -> u64 {
        let id = self.alloc_id();
        let power_snapshot: BTreeMap<Address, u64> =
            balances.iter().filter(|(_, b)| !b.is_zero()).map(|(a, b)| (*a, b.micro())).collect();
        let total_power = power_snapshot.values().sum();
        self.params.insert(
            id,
            ParamProposal {
                id,
                param_key: key,
                new_value: value,
                proposer,
                proposed_at: now,
                voting_period_ms: self.config.voting_period_ms.min(self.config.timelock_ms),
                timelock_ms: self.config.timelock_ms,
                quorum: Ppm::from_fraction(self.config.quorum),
                votes_for: 0,
                votes_against: 0,
                total_power,
                state: ProposalState::Open,
                power_snapshot,
                voted: BTreeSet::new(),
            },
        );
        id
    }

    pub fn propose_update(&mut self, payload: UpdatePayload) -> u64 {
        let id = self.alloc_id();
        let p = MultisigProposal::new(id, payload, self.config.signers_required, self.config.signers.iter().copied());
        self.updates.insert(id, p);
        id
    }

    pub fn apply(
        &mut self,
        sender: Address,
        action: &GovAction,
        now: SimTime,
        params: &mut ParamStore,
        attested_reserve: TokenAmount,
        balances: &BTreeMap<Address, TokenAmount>,
    ) -> Result<GovOutcome, GovernanceError> {
        self.expire(now);
        match action {
            GovAction::ProposeParam { key, value } => {
                let id = self.propose_param(sender, *key, *value, now, balances);
                Ok(GovOutcome::Proposed { id })
            }
            GovAction::Vote { proposal, support } => {
                let p = self.params.get_mut(proposal).ok_or(GovernanceError::UnknownProposal(*proposal))?;
                let power = p.vote(sender, *support, now)?;
                Ok(GovOutcome::Voted { id: *proposal, power })
            }
            GovAction::Tally { proposal } => {
                let p = self.params.get_mut(proposal).ok_or(GovernanceError::UnknownProposal(*proposal))?;
                let state = p.tally(now)?;
                Ok(GovOutcome::Tallied { id: *proposal, state })
            }
            GovAction::Execute { proposal } => {
                let p = self.params.get_mut(proposal).ok_or(GovernanceError::UnknownProposal(*proposal))?;
                if p.state == ProposalState::Open && now >= p.voting_closes_at() {
                    p.tally(now)?;
                }
                match p.execute_param(now, params, attested_reserve) {
                    Ok(ExecResult::Executed { key, old, new }) => {
                        Ok(GovOutcome::ParamChanged { id: *proposal, key, old, new })
                    }
                    Err(GovernanceError::RejectedOutOfBounds { id, reason }) => {
                        Ok(GovOutcome::OutOfBounds { id, key: p.param_key, value: p.new_value, reason })
                    }
                    Err(e) => Err(e),
                }
            }
            GovAction::ProposeUpdate { payload } => {
                let id = self.propose_update(payload.clone());
                Ok(GovOutcome::Proposed { id })
            }
            GovAction::SignUpdate { proposal } => {
                let p = self.updates.get_mut(proposal).ok_or(GovernanceError::UnknownProposal(*proposal))?;
                let status = p.sign_update(sender)?;
                if status == UpdateStatus::Executable {
                    p.executed = true;
                    return Ok(GovOutcome::UpdateApproved { id: *proposal, payload: p.payload.clone() });
                }
                Ok(GovOutcome::UpdateSigned { id: *proposal, status })
            }
        }
    }

    fn expire(&mut self, now: SimTime) {
        let grace = self.config.execution_grace_ms;
        for p in self.params.values_mut() {
            if p.state == ProposalState::Passed && now > p.ready_at() + grace {
                p.state = ProposalState::Expired;
            }
        }
    }

    /// Every stored parameter proposal, for invariant checks.
    pub fn param_proposals(&self) -> impl Iterator<Item = &ParamProposal> {
        self.params.values()
    }
}
