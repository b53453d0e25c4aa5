//! Issuance (mint against locked gold) and redemption (burn, then release
//! physical gold).

use std::collections::BTreeMap;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::WorkflowError;
use crate::ledger::{Ledger, Receipt, TxId, TxKind, TRADING_HALTED};
use crate::sim::{RngStream, SimTime};
use crate::units::{Address, TokenAmount};
use crate::vault::{LockTicket, Vault};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IssuanceConfig {
    pub processing_mean_ms: f64,
    pub processing_std_ms: f64,
    pub processing_min_ms: f64,
}

impl Default for IssuanceConfig {
    fn default() -> Self {
        IssuanceConfig { processing_mean_ms: 400.0, processing_std_ms: 50.0, processing_min_ms: 100.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PendingMint {
    pub request: u64,
    pub recipient: Address,
    pub amount: TokenAmount,
    pub ticket: LockTicket,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PendingBurn {
    pub request: u64,
    pub owner: Address,
    pub amount: TokenAmount,
}

/// What the orchestrator should do after a burn receipt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BurnResult {
    Redeemed,
    /// The burn hit a breaker halt; resubmit after the lift.
    Retry(PendingBurn),
    Failed(WorkflowError),
}

#[derive(Debug, Default)]
pub struct IssuanceAgent {
    config: IssuanceConfig,
    mints: BTreeMap<TxId, PendingMint>,
    burns: BTreeMap<TxId, PendingBurn>,
    in_flight_mint: TokenAmount,
    frozen: bool,
}

impl IssuanceAgent {
    pub fn new(config: IssuanceConfig) -> Self {
        IssuanceAgent { config, ..Default::default() }
    }

    /// Agent-side handling time before the mint is submitted.
    pub fn processing_delay_ms(&self, rng: &mut RngStream) -> u64 {
        let c = &self.config;
        let normal = Normal::new(c.processing_mean_ms, c.processing_std_ms).expect("valid std");
        normal.sample(rng).max(c.processing_min_ms).round() as u64
    }

    /// Set and cleared by risk control alongside the on-chain pause flag.
    pub fn set_frozen(&mut self, frozen: bool) {
        self.frozen = frozen;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn in_flight_mint(&self) -> TokenAmount {
        self.in_flight_mint
    }

    pub fn pending_mints(&self) -> usize {
        self.mints.len()
    }

    pub fn pending_burns(&self) -> usize {
        self.burns.len()
    }

    /// Mirrors the on-chain ceiling, counting mints this agent already has in flight.
    pub fn check_headroom(&self, ledger: &Ledger, amount: TokenAmount) -> Result<(), WorkflowError> {
        if self.frozen || ledger.issuance_paused() {
            return Err(WorkflowError::IssuanceFrozen);
        }
        let after = ledger.total_supply() + self.in_flight_mint + amount;
        if after > ledger.attested_reserve() + ledger.epsilon() {
            return Err(WorkflowError::InsufficientReserveHeadroom);
        }
        Ok(())
    }

    /// Checks headroom, locks gold and submits the mint.
    pub fn submit_mint(
        &mut self,
        request: u64,
        recipient: Address,
        amount: TokenAmount,
        now: SimTime,
        ledger: &mut Ledger,
        vault: &mut Vault,
    ) -> Result<TxId, WorkflowError> {
        self.check_headroom(ledger, amount)?;
        let ticket = vault.lock_for_issuance(amount).map_err(|_| WorkflowError::InsufficientReserveHeadroom)?;
        let batch = format!("lot-{}", ticket.id);
        let tx = ledger.submit_tx(Address::ISSUANCE_AGENT, TxKind::Mint { recipient, amount, batch }, now);
        self.in_flight_mint += amount;
        self.mints.insert(tx, PendingMint { request, recipient, amount, ticket });
        Ok(tx)
    }

    /// Commits or releases the vault lock. `None` if `tx` is not one of ours.
    pub fn on_mint_receipt(
        &mut self,
        tx: TxId,
        receipt: &Receipt,
        vault: &mut Vault,
    ) -> Option<(PendingMint, Result<(), WorkflowError>)> {
        let p = self.mints.remove(&tx)?;
        self.in_flight_mint -= p.amount;
        let result = match receipt {
            Receipt::Accepted => {
                vault.commit_issuance(p.ticket).expect("ticket held by agent");
                Ok(())
            }
            Receipt::Reverted(reason) => {
                vault.release(p.ticket).expect("ticket held by agent");
                Err(WorkflowError::Reverted(reason.clone()))
            }
        };
        Some((p, result))
    }

    pub fn submit_burn(
        &mut self,
        request: u64,
        owner: Address,
        amount: TokenAmount,
        available: TokenAmount,
        now: SimTime,
        ledger: &mut Ledger,
    ) -> Result<TxId, WorkflowError> {
        if available < amount {
            return Err(WorkflowError::InsufficientBalance);
        }
        let tx = ledger.submit_tx(Address::ISSUANCE_AGENT, TxKind::Burn { owner, amount }, now);
        self.burns.insert(tx, PendingBurn { request, owner, amount });
        Ok(tx)
    }

    pub fn resubmit_burn(&mut self, p: PendingBurn, now: SimTime, ledger: &mut Ledger) -> TxId {
        let tx = ledger.submit_tx(Address::ISSUANCE_AGENT, TxKind::Burn { owner: p.owner, amount: p.amount }, now);
        self.burns.insert(tx, p);
        tx
    }

    /// On a confirmed burn, releases the matching physical gold.
    pub fn on_burn_receipt(&mut self, tx: TxId, receipt: &Receipt, vault: &mut Vault) -> Option<(u64, BurnResult)> {
        let p = self.burns.remove(&tx)?;
        let request = p.request;
        let result = match receipt {
            Receipt::Accepted => {
                match vault.lock_for_redemption(p.amount).and_then(|t| vault.withdraw_physical(Some(t), p.amount)) {
                    Ok(()) => BurnResult::Redeemed,
                    Err(e) => BurnResult::Failed(WorkflowError::Reverted(e.to_string())),
                }
            }
            Receipt::Reverted(reason) if reason == TRADING_HALTED => BurnResult::Retry(p),
            Receipt::Reverted(reason) => BurnResult::Failed(WorkflowError::Reverted(reason.clone())),
        };
        Some((request, result))
    }
}
