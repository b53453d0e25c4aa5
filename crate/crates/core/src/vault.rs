//! Physical gold custody: ounces held, allocated to issued tokens, or locked
//! for in-flight workflows, plus periodic attestations and the mis-report
//! fault.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::VaultError;
use crate::sim::SimTime;
use crate::units::{Address, Ppm, TokenAmount};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LockPurpose {
    Issuance,
    Redemption,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockTicket {
    pub id: u64,
    pub amount: TokenAmount,
    pub purpose: LockPurpose,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Misreport {
    pub shortfall_fraction: f64,
    pub since: SimTime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attestation {
    pub reported_oz: TokenAmount,
    pub t: SimTime,
    pub auditor: Address,
}

#[derive(Clone, Debug)]
pub struct Vault {
    total_oz: TokenAmount,
    /// Gold backing tokens already minted.
    allocated_oz: TokenAmount,
    locked_oz: TokenAmount,
    attestation_interval_ms: u64,
    active_fault: Option<Misreport>,
    tickets: BTreeMap<u64, LockTicket>,
    next_ticket: u64,
    auditor: Address,
}

impl Vault {
    pub fn new(total_oz: TokenAmount, attestation_interval_ms: u64) -> Self {
        Vault {
            total_oz,
            allocated_oz: TokenAmount::ZERO,
            locked_oz: TokenAmount::ZERO,
            attestation_interval_ms,
            active_fault: None,
            tickets: BTreeMap::new(),
            next_ticket: 1,
            auditor: Address::AUDITOR,
        }
    }

    /// Marks `amount` as backing tokens that exist at genesis.
    pub fn with_allocated(mut self, amount: TokenAmount) -> Self {
        assert!(amount <= self.total_oz, "genesis supply exceeds vault holdings");
        self.allocated_oz = amount;
        self
    }

    pub fn total_oz(&self) -> TokenAmount {
        self.total_oz
    }

    pub fn allocated_oz(&self) -> TokenAmount {
        self.allocated_oz
    }

    pub fn locked_oz(&self) -> TokenAmount {
        self.locked_oz
    }

    pub fn free_oz(&self) -> TokenAmount {
        self.total_oz - self.allocated_oz - self.locked_oz
    }

    pub fn attestation_interval_ms(&self) -> u64 {
        self.attestation_interval_ms
    }

    pub fn active_fault(&self) -> Option<Misreport> {
        self.active_fault
    }

    pub fn open_tickets(&self) -> usize {
        self.tickets.len()
    }

    fn new_ticket(&mut self, amount: TokenAmount, purpose: LockPurpose) -> LockTicket {
        let t = LockTicket { id: self.next_ticket, amount, purpose };
        self.next_ticket += 1;
        self.tickets.insert(t.id, t);
        self.locked_oz += amount;
        t
    }

    /// Reserves unallocated gold for a pending mint.
    pub fn lock_for_issuance(&mut self, amount: TokenAmount) -> Result<LockTicket, VaultError> {
        let available = self.free_oz();
        if available < amount {
            return Err(VaultError::InsufficientUnlocked { available, requested: amount });
        }
        Ok(self.new_ticket(amount, LockPurpose::Issuance))
    }

    /// Moves allocated gold into a redemption lock once the burn has confirmed.
    pub fn lock_for_redemption(&mut self, amount: TokenAmount) -> Result<LockTicket, VaultError> {
        if self.allocated_oz < amount {
            return Err(VaultError::InsufficientUnlocked { available: self.allocated_oz, requested: amount });
        }
        self.allocated_oz -= amount;
        Ok(self.new_ticket(amount, LockPurpose::Redemption))
    }

    /// Undoes a lock. Redemption locks return to the allocated pool.
    pub fn release(&mut self, ticket: LockTicket) -> Result<(), VaultError> {
        let t = self.tickets.remove(&ticket.id).ok_or(VaultError::UnknownTicket(ticket.id))?;
        self.locked_oz -= t.amount;
        if t.purpose == LockPurpose::Redemption {
            self.allocated_oz += t.amount;
        }
        Ok(())
    }

    /// The mint confirmed: the locked gold now backs circulating tokens.
    pub fn commit_issuance(&mut self, ticket: LockTicket) -> Result<(), VaultError> {
        let t = self.tickets.remove(&ticket.id).ok_or(VaultError::UnknownTicket(ticket.id))?;
        self.locked_oz -= t.amount;
        self.allocated_oz += t.amount;
        Ok(())
    }

    pub fn withdraw_physical(&mut self, ticket: Option<LockTicket>, amount: TokenAmount) -> Result<(), VaultError> {
        let covered = ticket
            .and_then(|t| self.tickets.get(&t.id).copied())
            .filter(|t| t.purpose == LockPurpose::Redemption && t.amount >= amount);
        let Some(t) = covered else {
            return Err(VaultError::UncoveredWithdrawal { requested: amount });
        };
        self.tickets.remove(&t.id);
        self.locked_oz -= t.amount;
        // any uncollected remainder goes back to the allocated pool
        self.allocated_oz += t.amount - amount;
        self.total_oz -= amount;
        Ok(())
    }

    pub fn deposit_physical(&mut self, amount: TokenAmount) {
        self.total_oz += amount;
    }

    pub fn inject_misreport(&mut self, shortfall_fraction: f64, since: SimTime) {
        self.active_fault = Some(Misreport { shortfall_fraction, since });
    }

    pub fn clear_fault(&mut self) {
        self.active_fault = None;
    }

    /// Reports `total_oz`, reduced by an active mis-report. Locks are an
    /// internal reservation and are not subtracted.
    pub fn issue_attestation(&self, now: SimTime) -> Attestation {
        let reported_oz = match self.active_fault {
            None => self.total_oz,
            Some(m) => {
                let keep = 1_000_000u64.saturating_sub(Ppm::from_fraction(m.shortfall_fraction).0);
                self.total_oz.mul_ppm(Ppm(keep))
            }
        };
        Attestation { reported_oz, t: now, auditor: self.auditor }
    }
}
