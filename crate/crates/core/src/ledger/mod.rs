//! Simulated chain: fixed-cadence blocks, the OZ token with its reserve
//! ceiling check, the circuit breaker, pause flags and the parameter store.

pub mod params;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::LedgerError;
use crate::governance::{GovAction, GovOutcome, Governance, GovernanceConfig, UpdatePayload};
use crate::oracle::{FeedId, PriceSample};
use crate::sim::SimTime;
use crate::units::{Address, Ppm, TokenAmount};

pub use params::{Bound, BoundsRegistry, ParamKey, ParamStore};

pub const RESERVE_CEILING_EXCEEDED: &str = "Reserve ceiling exceeded";
pub const ISSUANCE_PAUSED: &str = "issuance paused";
pub const TRADING_HALTED: &str = "trading halted";
pub const INSUFFICIENT_BALANCE: &str = "insufficient balance";

/// Longest breaker window the bounds registry admits; price history is kept this long.
const MAX_WINDOW_MS: u64 = 3_600_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LedgerConfig {
    pub block_interval_ms: u64,
    /// Delay between block production and agents observing its receipts.
    pub commit_latency_ms: u64,
    /// Stand-in for parallelized execution capacity.
    pub max_tx_per_block: usize,
    pub auditors: Vec<Address>,
}

impl Default for LedgerConfig {
    fn default() -> Self {
        LedgerConfig { block_interval_ms: 1000, commit_latency_ms: 300, max_tx_per_block: 20_000, auditors: vec![Address::AUDITOR] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TxId(pub u64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TxKind {
    Mint { recipient: Address, amount: TokenAmount, batch: String },
    Burn { owner: Address, amount: TokenAmount },
    Transfer { from: Address, to: Address, amount: TokenAmount },
    PostPrice { sample: PriceSample },
    SetReserve { amount: TokenAmount },
    Governance { action: GovAction },
}

impl TxKind {
    pub fn tag(&self) -> &'static str {
        match self {
            TxKind::Mint { .. } => "mint",
            TxKind::Burn { .. } => "burn",
            TxKind::Transfer { .. } => "transfer",
            TxKind::PostPrice { .. } => "post_price",
            TxKind::SetReserve { .. } => "set_reserve",
            TxKind::Governance { .. } => "governance",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tx {
    pub id: TxId,
    pub kind: TxKind,
    pub sender: Address,
    pub submitted_at: SimTime,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Receipt {
    Accepted,
    Reverted(String),
}

impl Receipt {
    pub fn reverted(reason: &str) -> Self {
        Receipt::Reverted(reason.to_string())
    }

    pub fn is_accepted(&self) -> bool {
        matches!(self, Receipt::Accepted)
    }
}

/// Reserve ceiling inputs captured for every accepted mint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MintCheck {
    pub supply_before: TokenAmount,
    pub amount: TokenAmount,
    pub attested_reserve: TokenAmount,
    pub epsilon: TokenAmount,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub height: u64,
    pub timestamp: SimTime,
    pub txs: Vec<(Tx, Receipt)>,
    pub accepted_mints: Vec<MintCheck>,
}

impl Block {
    pub fn accepted(&self) -> usize {
        self.txs.iter().filter(|(_, r)| r.is_accepted()).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TripDecision {
    Trip,
    NoTrip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LiftDecision {
    Lifted,
    StillPaused,
    NotPaused,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LedgerEvent {
    BreakerTripped { reason: String },
    BreakerLifted { reason: String },
    ReserveAttested { amount: TokenAmount, auditor: Address },
    Governance { sender: Address, outcome: GovOutcome },
    GovernanceFailed { sender: Address, reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockOutcome {
    pub block: Block,
    pub events: Vec<LedgerEvent>,
}

/// Pure breaker rule: trip when any sample in the window differs from the
/// newest one by strictly more than `threshold`.
pub fn breaker_condition(window: &[PriceSample], threshold: Ppm) -> TripDecision {
    let Some(latest) = window.iter().max_by_key(|s| s.t) else {
        return TripDecision::NoTrip;
    };
    let p_now = latest.price.0 as u128;
    let tripped = window.iter().any(|s| {
        let p = s.price.0 as u128;
        p_now.abs_diff(p) * 1_000_000 > threshold.0 as u128 * p
    });
    if tripped {
        TripDecision::Trip
    } else {
        TripDecision::NoTrip
    }
}

/// Serializable view for state dumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerSnapshot {
    pub height: u64,
    pub timestamp: SimTime,
    pub total_supply: TokenAmount,
    pub attested_reserve: TokenAmount,
    pub epsilon: TokenAmount,
    pub issuance_paused: bool,
    pub trading_paused: bool,
    pub breaker_tripped_at: Option<SimTime>,
    pub reference_feed: FeedId,
    pub params: BTreeMap<String, f64>,
}

pub struct Ledger {
    config: LedgerConfig,
    balances: BTreeMap<Address, TokenAmount>,
    total_supply: TokenAmount,
    attested_reserve: TokenAmount,
    issuance_paused: bool,
    trading_paused: bool,
    breaker_tripped_at: Option<SimTime>,
    params: ParamStore,
    governance: Governance,
    reference_feed: FeedId,
    prices: BTreeMap<FeedId, VecDeque<PriceSample>>,
    pending: VecDeque<Tx>,
    next_tx: u64,
    height: u64,
    last_block_at: SimTime,
}

impl Ledger {
    pub fn new(config: LedgerConfig, governance: GovernanceConfig) -> Self {
        Ledger {
            config,
            balances: BTreeMap::new(),
            total_supply: TokenAmount::ZERO,
            attested_reserve: TokenAmount::ZERO,
            issuance_paused: false,
            trading_paused: false,
            breaker_tripped_at: None,
            params: ParamStore::default(),
            governance: Governance::new(governance),
            reference_feed: FeedId::Primary,
            prices: BTreeMap::new(),
            pending: VecDeque::new(),
            next_tx: 0,
            height: 0,
            last_block_at: SimTime::ZERO,
        }
    }

    /// Genesis allocation. Supply is the sum of the allocations.
    pub fn with_genesis(mut self, allocations: impl IntoIterator<Item = (Address, TokenAmount)>, attested_reserve: TokenAmount) -> Self {
        for (addr, amount) in allocations {
            *self.balances.entry(addr).or_default() += amount;
            self.total_supply += amount;
        }
        self.attested_reserve = attested_reserve;
        self
    }

    pub fn config(&self) -> &LedgerConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn governance(&self) -> &Governance {
        &self.governance
    }

    pub fn balance(&self, addr: Address) -> TokenAmount {
        self.balances.get(&addr).copied().unwrap_or_default()
    }

    pub fn balances(&self) -> &BTreeMap<Address, TokenAmount> {
        &self.balances
    }

    pub fn total_supply(&self) -> TokenAmount {
        self.total_supply
    }

    pub fn attested_reserve(&self) -> TokenAmount {
        self.attested_reserve
    }

    pub fn epsilon(&self) -> TokenAmount {
        self.params.epsilon()
    }

    pub fn issuance_paused(&self) -> bool {
        self.issuance_paused
    }

    pub fn trading_paused(&self) -> bool {
        self.trading_paused
    }

    pub fn breaker_tripped_at(&self) -> Option<SimTime> {
        self.breaker_tripped_at
    }

    pub fn reference_feed(&self) -> FeedId {
        self.reference_feed
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// Timestamp of the block that will include a tx submitted at `t`.
    pub fn inclusion_time(&self, t: SimTime) -> SimTime {
        let iv = self.config.block_interval_ms;
        SimTime((t.as_millis() / iv + 1) * iv)
    }

    pub fn submit_tx(&mut self, sender: Address, kind: TxKind, now: SimTime) -> TxId {
        let id = TxId(self.next_tx);
        self.next_tx += 1;
        self.pending.push_back(Tx { id, kind, sender, submitted_at: now });
        id
    }

    pub fn conservation_holds(&self) -> bool {
        self.balances.values().copied().sum::<TokenAmount>() == self.total_supply
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            height: self.height,
            timestamp: self.last_block_at,
            total_supply: self.total_supply,
            attested_reserve: self.attested_reserve,
            epsilon: self.epsilon(),
            issuance_paused: self.issuance_paused,
            trading_paused: self.trading_paused,
            breaker_tripped_at: self.breaker_tripped_at,
            reference_feed: self.reference_feed,
            params: self.params.to_human(),
        }
    }

    // --- token contract -------------------------------------------------

    /// Reserve ceiling check followed by the mint. Reverts leave state untouched.
    pub fn execute_mint(&mut self, recipient: Address, amount: TokenAmount) -> Receipt {
        if self.trading_paused {
            return Receipt::reverted(TRADING_HALTED);
        }
        if self.issuance_paused {
            return Receipt::reverted(ISSUANCE_PAUSED);
        }
        if self.total_supply + amount > self.attested_reserve + self.epsilon() {
            return Receipt::reverted(RESERVE_CEILING_EXCEEDED);
        }
        *self.balances.entry(recipient).or_default() += amount;
        self.total_supply += amount;
        Receipt::Accepted
    }

    /// Burns are blocked by a breaker halt but not by an issuance freeze.
    pub fn execute_burn(&mut self, owner: Address, amount: TokenAmount) -> Receipt {
        if self.trading_paused {
            return Receipt::reverted(TRADING_HALTED);
        }
        let bal = self.balance(owner);
        if bal < amount {
            return Receipt::reverted(INSUFFICIENT_BALANCE);
        }
        self.balances.insert(owner, bal - amount);
        self.total_supply -= amount;
        Receipt::Accepted
    }

    pub fn execute_transfer(&mut self, from: Address, to: Address, amount: TokenAmount) -> Receipt {
        if self.trading_paused {
            return Receipt::reverted(TRADING_HALTED);
        }
        let bal = self.balance(from);
        if bal < amount {
            return Receipt::reverted(INSUFFICIENT_BALANCE);
        }
        self.balances.insert(from, bal - amount);
        *self.balances.entry(to).or_default() += amount;
        Receipt::Accepted
    }

    /// Enforcement of shortfalls happens in the risk agent, not here.
    pub fn set_attested_reserve(&mut self, amount: TokenAmount, auditor: Address) -> Result<Receipt, LedgerError> {
        if !self.config.auditors.contains(&auditor) {
            return Err(LedgerError::Unauthorized(auditor));
        }
        self.attested_reserve = amount;
        Ok(Receipt::Accepted)
    }

    // --- pause flags ------------------------------------------------------

    pub fn evaluate_breaker(&mut self, window: &[PriceSample], now: SimTime) -> TripDecision {
        let decision = breaker_condition(window, self.params.swing_threshold());
        if decision == TripDecision::Trip {
            self.trip_breaker(now);
        }
        decision
    }

    /// Direct trip, used by the risk agent. Re-tripping restarts the cooldown.
    pub fn trip_breaker(&mut self, now: SimTime) {
        self.trading_paused = true;
        self.breaker_tripped_at = Some(now);
    }

    pub fn breaker_auto_lift(&mut self, now: SimTime) -> LiftDecision {
        match (self.trading_paused, self.breaker_tripped_at) {
            (true, Some(at)) if now.since(at) >= self.params.cooldown_ms() => {
                self.trading_paused = false;
                self.breaker_tripped_at = None;
                LiftDecision::Lifted
            }
            (true, _) => LiftDecision::StillPaused,
            _ => LiftDecision::NotPaused,
        }
    }

    pub fn governance_unpause(&mut self) -> LiftDecision {
        if !self.trading_paused {
            return LiftDecision::NotPaused;
        }
        self.trading_paused = false;
        self.breaker_tripped_at = None;
        LiftDecision::Lifted
    }

    /// Reserve freeze, set and cleared by the risk agent.
    pub fn set_issuance_paused(&mut self, paused: bool) {
        self.issuance_paused = paused;
    }

    pub fn set_reference_feed(&mut self, feed: FeedId) {
        self.reference_feed = feed;
    }

    fn record_price(&mut self, sample: PriceSample) {
        let hist = self.prices.entry(sample.feed).or_default();
        hist.push_back(sample);
        let cutoff = sample.t.as_millis().saturating_sub(MAX_WINDOW_MS);
        while hist.front().is_some_and(|s| s.t.as_millis() < cutoff) {
            hist.pop_front();
        }
    }

    /// On-chain samples for `feed` within `[now - window, now]`.
    pub fn price_window(&self, feed: FeedId, now: SimTime) -> Vec<PriceSample> {
        let from = now - self.params.window_ms();
        self.prices
            .get(&feed)
            .map(|h| h.iter().filter(|s| s.t >= from && s.t <= now).copied().collect())
            .unwrap_or_default()
    }

    // --- block production -------------------------------------------------

    pub fn produce_block(&mut self, now: SimTime) -> BlockOutcome {
        let mut events = Vec::new();
        if self.breaker_auto_lift(now) == LiftDecision::Lifted {
            events.push(LedgerEvent::BreakerLifted { reason: "cooldown".into() });
        }
        self.height += 1;
        self.last_block_at = now;
        let n = self.pending.len().min(self.config.max_tx_per_block);
        let mut txs = Vec::with_capacity(n);
        let mut accepted_mints = Vec::new();
        for tx in self.pending.drain(..n).collect::<Vec<_>>() {
            let receipt = self.execute(&tx, now, &mut events, &mut accepted_mints);
            txs.push((tx, receipt));
        }
        if !self.trading_paused {
            let window = self.price_window(self.reference_feed, now);
            if self.evaluate_breaker(&window, now) == TripDecision::Trip {
                events.push(LedgerEvent::BreakerTripped { reason: "price_swing".into() });
            }
        }
        BlockOutcome { block: Block { height: self.height, timestamp: now, txs, accepted_mints }, events }
    }

    fn execute(&mut self, tx: &Tx, now: SimTime, events: &mut Vec<LedgerEvent>, mints: &mut Vec<MintCheck>) -> Receipt {
        match &tx.kind {
            TxKind::Mint { recipient, amount, .. } => {
                if tx.sender != Address::ISSUANCE_AGENT {
                    return Receipt::reverted("unauthorized minter");
                }
                let check = MintCheck {
                    supply_before: self.total_supply,
                    amount: *amount,
                    attested_reserve: self.attested_reserve,
                    epsilon: self.epsilon(),
                };
                let r = self.execute_mint(*recipient, *amount);
                if r.is_accepted() {
                    mints.push(check);
                }
                r
            }
            TxKind::Burn { owner, amount } => {
                if tx.sender != Address::ISSUANCE_AGENT && tx.sender != *owner {
                    return Receipt::reverted("unauthorized burner");
                }
                self.execute_burn(*owner, *amount)
            }
            TxKind::Transfer { from, to, amount } => {
                if tx.sender != *from && tx.sender != Address::EXCHANGE {
                    return Receipt::reverted("unauthorized transfer");
                }
                self.execute_transfer(*from, *to, *amount)
            }
            TxKind::PostPrice { sample } => {
                if tx.sender != Address::ORACLE_RELAY {
                    return Receipt::reverted("unauthorized oracle");
                }
                self.record_price(*sample);
                Receipt::Accepted
            }
            TxKind::SetReserve { amount } => match self.set_attested_reserve(*amount, tx.sender) {
                Ok(r) => {
                    events.push(LedgerEvent::ReserveAttested { amount: *amount, auditor: tx.sender });
                    r
                }
                Err(e) => Receipt::Reverted(e.to_string()),
            },
            TxKind::Governance { action } => {
                let outcome =
                    self.governance.apply(tx.sender, action, now, &mut self.params, self.attested_reserve, &self.balances);
                match outcome {
                    Ok(outcome) => {
                        if let GovOutcome::UpdateApproved { payload: UpdatePayload::Unpause, .. } = &outcome {
                            if self.governance_unpause() == LiftDecision::Lifted {
                                events.push(LedgerEvent::BreakerLifted { reason: "governance".into() });
                            }
                        }
                        let receipt = match &outcome {
                            GovOutcome::OutOfBounds { .. } => Receipt::reverted("parameter out of bounds"),
                            _ => Receipt::Accepted,
                        };
                        events.push(LedgerEvent::Governance { sender: tx.sender, outcome });
                        receipt
                    }
                    Err(e) => {
                        events.push(LedgerEvent::GovernanceFailed { sender: tx.sender, reason: e.to_string() });
                        Receipt::Reverted(e.to_string())
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::Price;

    fn ledger(supply_oz: u64, reserve: TokenAmount) -> Ledger {
        Ledger::new(LedgerConfig::default(), GovernanceConfig::default())
            .with_genesis([(Address::user(0), TokenAmount::from_oz(supply_oz))], reserve)
    }

    #[test]
    fn mint_at_ceiling_reverts() {
        let mut l = ledger(1000, TokenAmount::from_oz(1000));
        assert_eq!(l.execute_mint(Address::user(1), TokenAmount::from_oz(5)), Receipt::reverted(RESERVE_CEILING_EXCEEDED));
        assert_eq!(l.total_supply(), TokenAmount::from_oz(1000));
    }

    #[test]
    fn mint_up_to_reserve_is_allowed() {
        let mut l = ledger(0, TokenAmount::from_oz(1000));
        assert!(l.execute_mint(Address::user(1), TokenAmount::from_oz(1000)).is_accepted());
        assert_eq!(l.total_supply(), TokenAmount::from_oz(1000));
    }

    #[test]
    fn epsilon_is_additive_and_exact() {
        let mut l = ledger(1000, TokenAmount::from_micro(999_999_900));
        l.params_mut().set(ParamKey::Epsilon, 100, TokenAmount::from_oz(1000)).unwrap();
        // 1000.0001 > 999.9999 + 0.0001
        assert_eq!(l.execute_mint(Address::user(1), TokenAmount(100)), Receipt::reverted(RESERVE_CEILING_EXCEEDED));
    }

    #[test]
    fn burn_rules() {
        let mut l = ledger(10, TokenAmount::from_oz(10));
        assert_eq!(l.execute_burn(Address::user(0), TokenAmount::from_oz(11)), Receipt::reverted(INSUFFICIENT_BALANCE));
        l.set_issuance_paused(true);
        assert!(l.execute_burn(Address::user(0), TokenAmount::from_oz(10)).is_accepted());
        assert_eq!(l.balance(Address::user(0)), TokenAmount::ZERO);
        assert_eq!(l.total_supply(), TokenAmount::ZERO);
    }

    #[test]
    fn issuance_pause_blocks_only_mints() {
        let mut l = ledger(10, TokenAmount::from_oz(100));
        l.set_issuance_paused(true);
        assert_eq!(l.execute_mint(Address::user(0), TokenAmount::from_oz(1)), Receipt::reverted(ISSUANCE_PAUSED));
        assert!(l.execute_transfer(Address::user(0), Address::user(1), TokenAmount::from_oz(1)).is_accepted());
    }

    #[test]
    fn reserve_updates_require_auditor() {
        let mut l = ledger(1000, TokenAmount::from_oz(1000));
        assert_eq!(l.set_attested_reserve(TokenAmount::from_oz(5), Address::user(3)), Err(LedgerError::Unauthorized(Address::user(3))));
        assert_eq!(l.attested_reserve(), TokenAmount::from_oz(1000));
        assert!(l.set_attested_reserve(TokenAmount::from_oz(995), Address::AUDITOR).is_ok());
        assert_eq!(l.attested_reserve(), TokenAmount::from_oz(995));
    }

    #[test]
    fn submission_lands_in_next_block() {
        let l = ledger(0, TokenAmount::ZERO);
        assert_eq!(l.inclusion_time(SimTime(10_400)), SimTime(11_000));
        assert_eq!(l.inclusion_time(SimTime(11_000)), SimTime(12_000));
    }

    #[test]
    fn transfer_during_halt_reverts_in_block() {
        let mut l = ledger(10, TokenAmount::from_oz(10));
        l.trip_breaker(SimTime::from_secs(1));
        l.submit_tx(Address::user(0), TxKind::Transfer { from: Address::user(0), to: Address::user(1), amount: TokenAmount::from_oz(1) }, SimTime::from_secs(1));
        let out = l.produce_block(SimTime::from_secs(2));
        assert_eq!(out.block.txs[0].1, Receipt::reverted(TRADING_HALTED));
    }

    #[test]
    fn block_executes_in_submission_order() {
        let mut l = ledger(10, TokenAmount::from_oz(10));
        let a = Address::user(0);
        let b = Address::user(1);
        l.submit_tx(a, TxKind::Transfer { from: a, to: b, amount: TokenAmount::from_oz(10) }, SimTime(1));
        l.submit_tx(b, TxKind::Transfer { from: b, to: a, amount: TokenAmount::from_oz(4) }, SimTime(2));
        let out = l.produce_block(SimTime(1000));
        assert!(out.block.txs.iter().all(|(_, r)| r.is_accepted()));
        assert_eq!(l.balance(a), TokenAmount::from_oz(4));
        assert!(l.conservation_holds());
    }

    fn sample(t_s: u64, usd: f64) -> PriceSample {
        PriceSample { feed: FeedId::Primary, price: Price::from_usd(usd), t: SimTime::from_secs(t_s) }
    }

    #[test]
    fn breaker_threshold_examples() {
        let mut l = ledger(0, TokenAmount::ZERO);
        assert_eq!(l.evaluate_breaker(&[sample(0, 2400.0), sample(300, 2446.0)], SimTime::from_secs(300)), TripDecision::NoTrip);
        assert_eq!(l.evaluate_breaker(&[sample(0, 2400.0), sample(300, 2400.0)], SimTime::from_secs(300)), TripDecision::NoTrip);
        assert_eq!(l.evaluate_breaker(&[], SimTime::from_secs(300)), TripDecision::NoTrip);
        assert!(!l.trading_paused());
        assert_eq!(l.evaluate_breaker(&[sample(0, 2400.0), sample(300, 2450.0)], SimTime::from_secs(300)), TripDecision::Trip);
        assert!(l.trading_paused());
        assert_eq!(l.breaker_tripped_at(), Some(SimTime::from_secs(300)));
    }

    #[test]
    fn breaker_cooldown() {
        let mut l = ledger(0, TokenAmount::ZERO);
        l.trip_breaker(SimTime::from_secs(100));
        assert_eq!(l.breaker_auto_lift(SimTime::from_secs(399)), LiftDecision::StillPaused);
        assert_eq!(l.breaker_auto_lift(SimTime::from_secs(400)), LiftDecision::Lifted);
        assert!(!l.trading_paused());
        l.trip_breaker(SimTime::from_secs(100));
        assert_eq!(l.governance_unpause(), LiftDecision::Lifted);
        assert_eq!(l.breaker_auto_lift(SimTime::from_secs(200)), LiftDecision::NotPaused);
    }

    #[test]
    fn on_chain_window_trips_breaker() {
        let mut l = ledger(0, TokenAmount::ZERO);
        for (t, p) in [(0, 2400.0), (100, 2420.0), (200, 2460.0)] {
            l.submit_tx(Address::ORACLE_RELAY, TxKind::PostPrice { sample: sample(t, p) }, SimTime::from_secs(t));
            let out = l.produce_block(SimTime::from_secs(t + 1));
            if t < 200 {
                assert!(out.events.is_empty());
            } else {
                assert_eq!(out.events, vec![LedgerEvent::BreakerTripped { reason: "price_swing".into() }]);
            }
        }
    }
}
