//! The discrete-event world: one scheduler driving every component.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde_json::json;

use crate::agents::{
    ActionKind, AlertKind, BurnResult, ComplianceAgent, ComplianceOutcome, IssuanceAgent, MarketMaker,
    Orchestrator, RebalanceAction, RiskAgent, UserProfile, WorkflowState,
};
use crate::error::{ExchangeError, WorkflowError};
use crate::exchange::{Exchange, OrderKind, Side};
use crate::governance::{GovOutcome, UpdatePayload};
use crate::harness::config::{FaultKind, FaultTarget, OperatorOp, ScenarioConfig};
use crate::harness::metrics::{
    ComplianceStats, HaltRecord, LatencyStats, MarketStats, MetricSample, MetricsSummary, VaultStats, TPS_DEFINITION,
};
use crate::harness::profiles::generate_profiles;
use crate::ledger::{Block, Ledger, LedgerEvent, Receipt, TxId, TxKind, TRADING_HALTED};
use crate::oracle::{FeedFault, FeedId, Oracle};
use crate::sim::{priority, EventLog, RngFactory, RngStream, Scheduler, SimTime};
use crate::units::{Address, Price, TokenAmount};
use crate::vault::Vault;

/// Peg check slack on top of the half-spread, for price rounding.
const PEG_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ev {
    RiskCycle,
    RiskEval,
    Block,
    Commit(u64),
    MarketTick,
    Attest,
    UserWake(usize),
    Admitted(u64),
    OrderArrive(u64),
    ProcessReady(u64),
    KycDone(u64),
    SignUp(usize),
    Scripted(usize),
    FaultStart(usize),
    FaultEnd(usize),
    Gov(usize),
    Operator(usize),
}

/// Settlement transfer and the workflows waiting on it.
#[derive(Clone, Debug)]
struct Settlement {
    from: Address,
    to: Address,
    amount: TokenAmount,
    workflows: Vec<u64>,
}

struct Rngs {
    price: RngStream,
    noise: RngStream,
    users: RngStream,
    think: RngStream,
    kyc: RngStream,
    issuance: RngStream,
}

pub struct RunOutput {
    pub summary: MetricsSummary,
    pub samples: Vec<MetricSample>,
    pub log: EventLog,
}

pub struct World {
    cfg: ScenarioConfig,
    end: SimTime,
    sched: Scheduler<Ev>,
    log: EventLog,
    rng: Rngs,
    ledger: Ledger,
    oracle: Oracle,
    vault: Vault,
    exchange: Exchange,
    compliance: ComplianceAgent,
    issuance: IssuanceAgent,
    mm: MarketMaker,
    risk: RiskAgent,
    orch: Orchestrator,
    profiles: Vec<UserProfile>,
    screened: Vec<Address>,
    /// Closed-loop user slot per live workflow.
    wf_slot: BTreeMap<u64, usize>,
    /// Tokens set aside for in-flight sells and redemptions.
    reserved: BTreeMap<Address, TokenAmount>,
    wf_reserved: BTreeMap<u64, (Address, TokenAmount)>,
    wf_side: BTreeMap<u64, Side>,
    pair_wfs: BTreeMap<(Address, Address), Vec<u64>>,
    settle_txs: BTreeMap<TxId, Settlement>,
    held_settlements: Vec<Settlement>,
    held_burns: Vec<crate::agents::issuance::PendingBurn>,
    rebalance_txs: BTreeMap<TxId, RebalanceAction>,
    cold_pending_out: TokenAmount,
    uncommitted: BTreeMap<u64, Block>,
    zero_net: BTreeMap<u64, Vec<u64>>,
    reveal_txs: Vec<TxId>,
    reveal_at: Option<SimTime>,
    oracle_fault_onset: Option<SimTime>,
    vault_fault_onset: Option<SimTime>,
    samples: Vec<MetricSample>,
    last_accepted: u64,
    halts: Vec<HaltRecord>,
    trades: u64,
    trades_during_halt: u64,
    rebalance_min_trigger: Option<f64>,
    feed_switches: Vec<(u64, String)>,
    violations: Vec<String>,
}

fn oz(v: f64) -> TokenAmount {
    TokenAmount::from_oz_f64(v)
}

fn pair(a: Address, b: Address) -> (Address, Address) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl World {
    /// Builds genesis state and schedules the opening events. `keep_log`
    /// retains records in memory; the digest is kept either way.
    pub fn new(cfg: ScenarioConfig, keep_log: bool) -> Self {
        let seeds = RngFactory::new(cfg.seed);
        let mut log = EventLog::new(keep_log);
        log.emit(SimTime::ZERO, "harness", "header", json!({"seed": cfg.seed, "config": cfg}));

        let reserve = oz(cfg.vault_initial_oz);
        let mut allocations = vec![(Address::MM_HOT, oz(cfg.genesis.mm_hot_oz)), (Address::MM_COLD, oz(cfg.genesis.mm_cold_oz))];
        allocations.extend((0..cfg.user_count as u64).map(|i| (Address::user(i), oz(cfg.genesis.user_oz))));
        allocations.extend(cfg.genesis.extra.iter().map(|(a, v)| (*a, oz(*v))));
        allocations.retain(|(_, v)| !v.is_zero());
        let genesis_supply: TokenAmount = allocations.iter().map(|(_, v)| *v).sum();

        let mut ledger = Ledger::new(cfg.ledger_config(), cfg.governance.clone()).with_genesis(allocations, reserve);
        for (key, v) in &cfg.params {
            ledger.params_mut().set(*key, key.encode(*v), reserve).expect("params validated with the config");
        }
        let vault = Vault::new(reserve, cfg.attestation_interval_ms).with_allocated(genesis_supply);
        let oracle = Oracle::new(cfg.price_process.clone(), cfg.secondary_noise, SimTime::ZERO);

        let mut compliance = ComplianceAgent::new(cfg.compliance.rules.clone());
        if cfg.users_preapproved {
            for i in 0..cfg.user_count as u64 {
                compliance.preapprove(Address::user(i), SimTime::ZERO);
            }
            for s in &cfg.scripted {
                if s.action != ActionKind::Onboard {
                    compliance.preapprove(Address::user(s.user), SimTime::ZERO);
                }
            }
        }

        let mut profiles = Vec::new();
        if let Some(spec) = &cfg.compliance.corpus {
            profiles = generate_profiles(spec, &cfg.compliance.rules.allowed_regions, &mut seeds.fork_rng("profiles"));
            for (i, p) in profiles.iter_mut().enumerate() {
                p.id = Address::user((cfg.user_count + i) as u64);
            }
        }

        let mut w = World {
            end: SimTime(cfg.duration_ms),
            sched: Scheduler::new(),
            log,
            rng: Rngs {
                price: seeds.fork_rng("price"),
                noise: seeds.fork_rng("noise"),
                users: seeds.fork_rng("users"),
                think: seeds.fork_rng("think"),
                kyc: seeds.fork_rng("kyc"),
                issuance: seeds.fork_rng("issuance"),
            },
            ledger,
            oracle,
            vault,
            exchange: Exchange::new(),
            compliance,
            issuance: IssuanceAgent::new(cfg.issuance.clone()),
            mm: MarketMaker::new(cfg.mm.clone()),
            risk: RiskAgent::new(cfg.risk.clone()),
            orch: Orchestrator::new(cfg.verbose_log).with_warmup(SimTime(cfg.warmup_ms)),
            profiles,
            screened: Vec::new(),
            wf_slot: BTreeMap::new(),
            reserved: BTreeMap::new(),
            wf_reserved: BTreeMap::new(),
            wf_side: BTreeMap::new(),
            pair_wfs: BTreeMap::new(),
            settle_txs: BTreeMap::new(),
            held_settlements: Vec::new(),
            held_burns: Vec::new(),
            rebalance_txs: BTreeMap::new(),
            cold_pending_out: TokenAmount::ZERO,
            uncommitted: BTreeMap::new(),
            zero_net: BTreeMap::new(),
            reveal_txs: Vec::new(),
            reveal_at: None,
            oracle_fault_onset: None,
            vault_fault_onset: None,
            samples: Vec::new(),
            last_accepted: 0,
            halts: Vec::new(),
            trades: 0,
            trades_during_halt: 0,
            rebalance_min_trigger: None,
            feed_switches: Vec::new(),
            violations: Vec::new(),
            cfg,
        };
        w.schedule_opening(&seeds);
        w
    }

    fn at(&mut self, t: SimTime, prio: u8, ev: Ev) {
        if t <= self.end {
            self.sched.schedule(t, prio, ev).expect("events are never scheduled in the past");
        }
    }

    fn schedule_opening(&mut self, seeds: &RngFactory) {
        let cfg = &self.cfg;
        let (block, cycle, attest) = (cfg.block_interval_ms, cfg.risk.cycle_ms, cfg.attestation_interval_ms);
        self.at(SimTime::ZERO, priority::AGENT, Ev::MarketTick);
        self.at(SimTime(block), priority::LEDGER, Ev::Block);
        self.at(SimTime(cycle), priority::RISK, Ev::RiskCycle);
        self.at(SimTime(attest), priority::AGENT, Ev::Attest);
        for u in 0..self.cfg.user_count {
            let t = self.think_time();
            self.at(SimTime(t), priority::AGENT, Ev::UserWake(u));
        }
        let window = self.cfg.compliance.corpus.as_ref().map_or(0, |c| c.signup_window_ms);
        let mut signup = seeds.fork_rng("signup");
        for i in 0..self.profiles.len() {
            let t = if window == 0 { 0 } else { signup.random_range(0..window) };
            self.at(SimTime(t), priority::AGENT, Ev::SignUp(i));
        }
        for i in 0..self.cfg.scripted.len() {
            let t = self.cfg.scripted[i].at_ms;
            self.at(SimTime(t), priority::AGENT, Ev::Scripted(i));
        }
        for i in 0..self.cfg.fault_schedule.len() {
            let t = self.cfg.fault_schedule[i].start_ms;
            self.at(SimTime(t), priority::EXTERNAL, Ev::FaultStart(i));
        }
        for i in 0..self.cfg.governance_schedule.len() {
            let t = self.cfg.governance_schedule[i].at_ms;
            self.at(SimTime(t), priority::EXTERNAL, Ev::Gov(i));
        }
        for i in 0..self.cfg.operator_schedule.len() {
            let t = self.cfg.operator_schedule[i].at_ms;
            self.at(SimTime(t), priority::EXTERNAL, Ev::Operator(i));
        }
    }

    fn think_time(&mut self) -> u64 {
        let rate = self.cfg.arrival_rate;
        let secs: f64 = Exp::new(rate).expect("arrival rate validated").sample(&mut self.rng.think);
        (secs * 1000.0).round() as u64
    }

    fn order_size(&mut self) -> TokenAmount {
        let d = &self.cfg.size_dist;
        let v = LogNormal::new(d.median_oz.ln(), d.sigma).expect("size distribution validated").sample(&mut self.rng.users);
        oz(v.min(self.cfg.max_order_oz)).max(TokenAmount(1))
    }

    fn available(&self, who: Address) -> TokenAmount {
        self.ledger.balance(who).saturating_sub(self.reserved.get(&who).copied().unwrap_or_default())
    }

    fn reserve(&mut self, wf: u64, who: Address, amount: TokenAmount) {
        *self.reserved.entry(who).or_default() += amount;
        self.wf_reserved.insert(wf, (who, amount));
    }

    pub fn run(mut self) -> RunOutput {
        while let Some(ev) = self.sched.pop_until(self.end) {
            let now = ev.fire_at;
            self.handle(ev.payload, now);
        }
        self.sched.advance_to(self.end);
        self.finish()
    }

    fn handle(&mut self, ev: Ev, now: SimTime) {
        match ev {
            Ev::RiskCycle => self.on_risk_cycle(now),
            Ev::RiskEval => self.on_risk_eval(now),
            Ev::Block => self.on_block(now),
            Ev::Commit(h) => self.on_commit(h, now),
            Ev::MarketTick => self.on_tick(now),
            Ev::Attest => self.on_attest(now),
            Ev::UserWake(u) => self.on_wake(u, now),
            Ev::Admitted(wf) => self.on_admitted(wf, now),
            Ev::OrderArrive(wf) => self.on_order(wf, now),
            Ev::ProcessReady(wf) => self.on_process(wf, now),
            Ev::KycDone(wf) => self.on_kyc(wf, now),
            Ev::SignUp(i) => self.on_signup(i, now),
            Ev::Scripted(i) => self.on_scripted(i, now),
            Ev::FaultStart(i) => self.on_fault_start(i, now),
            Ev::FaultEnd(i) => self.on_fault_end(i, now),
            Ev::Gov(i) => self.on_gov(i, now),
            Ev::Operator(i) => self.on_operator(i, now),
        }
    }

    // ---- workflows ----

    fn open(&mut self, user: Address, kind: ActionKind, amount: TokenAmount, slot: Option<usize>, now: SimTime) {
        let wf = self.orch.open(user, kind, amount, now, &mut self.log);
        if let Some(s) = slot {
            self.wf_slot.insert(wf, s);
        }
        let done = self.risk.queue().admit(now);
        self.at(done, priority::AGENT, Ev::Admitted(wf));
    }

    fn finish_wf(&mut self, wf: u64, result: Result<(), WorkflowError>, now: SimTime) {
        if let Some((who, amount)) = self.wf_reserved.remove(&wf) {
            let r = self.reserved.entry(who).or_default();
            *r = r.saturating_sub(amount);
        }
        self.wf_side.remove(&wf);
        self.orch.finish(wf, result, now, &mut self.log);
        if let Some(slot) = self.wf_slot.remove(&wf) {
            let t = now + self.think_time();
            self.at(t, priority::AGENT, Ev::UserWake(slot));
        }
    }

    fn on_wake(&mut self, slot: usize, now: SimTime) {
        let u: f64 = self.rng.users.random();
        let kind = self.cfg.action_mix.pick(u);
        let amount = self.order_size();
        self.open(Address::user(slot as u64), kind, amount, Some(slot), now);
    }

    fn on_scripted(&mut self, i: usize, now: SimTime) {
        let s = self.cfg.scripted[i].clone();
        self.open(Address::user(s.user), s.action, oz(s.amount_oz), None, now);
    }

    fn on_signup(&mut self, i: usize, now: SimTime) {
        let user = self.profiles[i].id;
        self.open(user, ActionKind::Onboard, TokenAmount::ZERO, None, now);
    }

    fn on_admitted(&mut self, wf: u64, now: SimTime) {
        let Some(w) = self.orch.get(wf).cloned() else { return };
        if w.kind.gated() && !self.compliance.is_onboarded(w.user, now) {
            self.finish_wf(wf, Err(WorkflowError::NotOnboarded), now);
            return;
        }
        match w.kind {
            ActionKind::Buy | ActionKind::Sell => {
                self.orch.advance(wf, WorkflowState::Matching, now, &mut self.log);
                self.at(now + self.cfg.order_handling_ms, priority::AGENT, Ev::OrderArrive(wf));
            }
            ActionKind::Issue | ActionKind::Redeem => {
                self.orch.advance(wf, WorkflowState::Processing, now, &mut self.log);
                let d = self.issuance.processing_delay_ms(&mut self.rng.issuance);
                self.at(now + d, priority::AGENT, Ev::ProcessReady(wf));
            }
            ActionKind::Onboard => {
                self.orch.advance(wf, WorkflowState::Compliance, now, &mut self.log);
                let Some(profile) = self.profiles.iter().find(|p| p.id == w.user).cloned() else {
                    self.finish_wf(wf, Err(WorkflowError::ComplianceBlocked), now);
                    return;
                };
                let d = self.compliance.screen(&profile, now, &mut self.rng.kyc);
                self.screened.push(w.user);
                self.at(d.decided_at, priority::AGENT, Ev::KycDone(wf));
            }
        }
    }

    fn on_kyc(&mut self, wf: u64, now: SimTime) {
        let Some(w) = self.orch.get(wf).cloned() else { return };
        if self.compliance.is_onboarded(w.user, now) {
            self.finish_wf(wf, Ok(()), now);
            return;
        }
        let d = self.compliance.decision(w.user).cloned();
        match d {
            Some(d) if d.outcome == ComplianceOutcome::ManualReview => {
                let at = d.review_resolved_at.expect("manual reviews resolve");
                self.log.emit(now, "compliance", "manual_review", json!({"user": w.user, "resolves_at": at}));
                self.at(at, priority::AGENT, Ev::KycDone(wf));
            }
            _ => self.finish_wf(wf, Err(WorkflowError::ComplianceBlocked), now),
        }
    }

    fn on_order(&mut self, wf: u64, now: SimTime) {
        let Some(w) = self.orch.get(wf).cloned() else { return };
        let side = if w.kind == ActionKind::Buy { Side::Bid } else { Side::Ask };
        let fee = self.ledger.params().fee_rate();
        let mut qty = w.amount;
        if side == Side::Ask {
            let avail = self.available(w.user);
            let need = qty + qty.mul_ppm(fee);
            if avail < need {
                self.finish_wf(wf, Err(WorkflowError::InsufficientBalance), now);
                return;
            }
        }
        let halted = self.ledger.trading_paused();
        let placed = self.exchange.place(w.user, side, OrderKind::Market, Price(0), qty, now, halted, true);
        let result = match placed {
            Ok((_, r)) => r,
            Err(ExchangeError::TradingHalted) => {
                self.finish_wf(wf, Err(WorkflowError::TradingHalted), now);
                return;
            }
            Err(e) => {
                self.finish_wf(wf, Err(WorkflowError::Reverted(e.to_string())), now);
                return;
            }
        };
        if result.trades.is_empty() {
            self.finish_wf(wf, Err(WorkflowError::NoLiquidity), now);
            return;
        }
        qty = TokenAmount::ZERO;
        for t in &result.trades {
            self.mm.on_fill(t);
            self.trades += 1;
            if halted {
                self.trades_during_halt += 1;
            }
            qty += t.qty;
            self.pair_wfs.entry(pair(t.maker, t.taker)).or_default().push(wf);
        }
        if side == Side::Ask {
            self.reserve(wf, w.user, qty + qty.mul_ppm(fee));
        }
        self.wf_side.insert(wf, side);
        self.orch.advance(wf, WorkflowState::AwaitingBlock, now, &mut self.log);
        self.maybe_rebalance(now);
    }

    fn reference_price(&self) -> f64 {
        self.oracle.feed(self.ledger.reference_feed()).last.price.as_usd()
    }

    fn maybe_rebalance(&mut self, now: SimTime) {
        let inv = self.mm.inventory_oz();
        let cold = self.ledger.balance(Address::MM_COLD).saturating_sub(self.cold_pending_out);
        let price = self.reference_price();
        let Some(action) = self.mm.rebalance(cold, price) else { return };
        let trigger = inv.abs();
        self.rebalance_min_trigger = Some(self.rebalance_min_trigger.map_or(trigger, |m| m.min(trigger)));
        self.log.emit(now, "market_maker", "rebalance", json!({"inventory_oz": inv, "action": action}));
        match action {
            RebalanceAction::ToCold(a) => {
                let tx = self.ledger.submit_tx(
                    Address::MM_HOT,
                    TxKind::Transfer { from: Address::MM_HOT, to: Address::MM_COLD, amount: a },
                    now,
                );
                self.rebalance_txs.insert(tx, action);
            }
            RebalanceAction::FromCold(a) => {
                let tx = self.ledger.submit_tx(
                    Address::MM_COLD,
                    TxKind::Transfer { from: Address::MM_COLD, to: Address::MM_HOT, amount: a },
                    now,
                );
                self.cold_pending_out += a;
                self.rebalance_txs.insert(tx, action);
            }
            RebalanceAction::Mint(a) => {
                if let Err(e) = self.issuance.submit_mint(0, Address::MM_HOT, a, now, &mut self.ledger, &mut self.vault) {
                    self.mm.rebalance_failed(action, price);
                    self.log.emit(now, "market_maker", "rebalance_failed", json!({"reason": e.to_string()}));
                }
            }
        }
    }

    fn on_process(&mut self, wf: u64, now: SimTime) {
        let Some(w) = self.orch.get(wf).cloned() else { return };
        let submitted = if w.kind == ActionKind::Issue {
            self.issuance.submit_mint(wf, w.user, w.amount, now, &mut self.ledger, &mut self.vault)
        } else {
            let avail = self.available(w.user);
            let r = self.issuance.submit_burn(wf, w.user, w.amount, avail, now, &mut self.ledger);
            if r.is_ok() {
                self.reserve(wf, w.user, w.amount);
            }
            r
        };
        match submitted {
            Ok(_) => self.orch.advance(wf, WorkflowState::AwaitingBlock, now, &mut self.log),
            Err(e) => self.finish_wf(wf, Err(e), now),
        }
    }

    // ---- ledger ----

    fn submit_settlement(&mut self, s: Settlement, now: SimTime) {
        let tx = self.ledger.submit_tx(
            Address::EXCHANGE,
            TxKind::Transfer { from: s.from, to: s.to, amount: s.amount },
            now,
        );
        self.settle_txs.insert(tx, s);
    }

    fn on_block(&mut self, now: SimTime) {
        if !self.ledger.trading_paused() {
            for s in std::mem::take(&mut self.held_settlements) {
                self.submit_settlement(s, now);
            }
            for p in std::mem::take(&mut self.held_burns) {
                self.issuance.resubmit_burn(p, now, &mut self.ledger);
            }
        }
        let (_, transfers) = self.exchange.take_settlement(self.ledger.params().fee_rate());
        for t in transfers {
            let workflows = self.pair_wfs.remove(&pair(t.from, t.to)).unwrap_or_default();
            self.submit_settlement(Settlement { from: t.from, to: t.to, amount: t.amount, workflows }, now);
        }
        let height = self.ledger.height() + 1;
        let netted: Vec<u64> = std::mem::take(&mut self.pair_wfs).into_values().flatten().collect();
        if !netted.is_empty() {
            self.zero_net.insert(height, netted);
        }

        let was_paused = self.ledger.trading_paused();
        let outcome = self.ledger.produce_block(now);
        self.last_accepted = outcome.block.accepted() as u64;
        for ev in outcome.events {
            self.on_ledger_event(ev, was_paused, now);
        }
        if !self.ledger.conservation_holds() {
            self.violation(now, "balances do not sum to total supply".into());
        }
        for m in &outcome.block.accepted_mints {
            if m.supply_before + m.amount > m.attested_reserve + m.epsilon {
                self.violation(now, format!("mint of {} exceeded reserve ceiling", m.amount));
            }
        }
        if outcome.block.txs.iter().any(|(tx, _)| !matches!(tx.kind, TxKind::PostPrice { .. })) || self.cfg.verbose_log {
            self.log.emit(
                now,
                "ledger",
                "block",
                json!({"height": outcome.block.height, "txs": outcome.block.txs.len(), "accepted": self.last_accepted, "supply": self.ledger.total_supply()}),
            );
        }
        self.uncommitted.insert(outcome.block.height, outcome.block);
        self.at(now + self.cfg.chain.commit_latency_ms, priority::LEDGER, Ev::Commit(height));
        self.at(now + self.cfg.block_interval_ms, priority::LEDGER, Ev::Block);
    }

    fn violation(&mut self, now: SimTime, msg: String) {
        self.log.emit(now, "harness", "invariant_violation", json!({"message": msg}));
        self.violations.push(msg);
    }

    fn open_halt(&mut self, now: SimTime, reason: &str) {
        self.halts.push(HaltRecord { tripped_at_ms: now.as_millis(), lifted_at_ms: None, reason: reason.to_string() });
        self.mm.withdraw_quotes(&mut self.exchange);
        self.log.emit(now, "ledger", "breaker_tripped", json!({"reason": reason}));
    }

    fn on_ledger_event(&mut self, ev: LedgerEvent, was_paused: bool, now: SimTime) {
        match ev {
            LedgerEvent::BreakerTripped { reason } => {
                if !was_paused || self.halts.last().is_none_or(|h| h.lifted_at_ms.is_some()) {
                    self.open_halt(now, &reason);
                }
            }
            LedgerEvent::BreakerLifted { reason } => {
                if let Some(h) = self.halts.last_mut().filter(|h| h.lifted_at_ms.is_none()) {
                    h.lifted_at_ms = Some(now.as_millis());
                }
                self.log.emit(now, "ledger", "breaker_lifted", json!({"reason": reason}));
            }
            LedgerEvent::ReserveAttested { amount, auditor } => {
                self.log.emit(now, "ledger", "reserve_attested", json!({"amount": amount, "auditor": auditor}));
            }
            LedgerEvent::Governance { sender, outcome } => {
                self.log.emit(now, "governance", "outcome", json!({"sender": sender, "outcome": format!("{outcome:?}")}));
                match outcome {
                    GovOutcome::OutOfBounds { id, key, value, reason } => {
                        let detail = format!("proposal {id}: {} = {} rejected: {reason}", key.name(), key.decode(value));
                        let idx = self.risk.on_governance_out_of_bounds(now, detail);
                        self.risk.set_onset(idx, now);
                        self.log_alert(idx, now);
                    }
                    GovOutcome::UpdateApproved { payload: UpdatePayload::ClearReserveFreeze, .. } => {
                        self.clear_freeze(now, "governance");
                    }
                    _ => {}
                }
            }
            LedgerEvent::GovernanceFailed { sender, reason } => {
                self.log.emit(now, "governance", "failed", json!({"sender": sender, "reason": reason}));
            }
        }
    }

    fn clear_freeze(&mut self, now: SimTime, by: &str) {
        match self.risk.request_clear(now, &mut self.ledger) {
            Ok(idx) => {
                self.issuance.set_frozen(false);
                self.log.emit(now, "risk", "freeze_cleared", json!({"alert": idx, "by": by}));
            }
            Err(e) => {
                self.log.emit(now, "risk", "clear_rejected", json!({"reason": format!("{e:?}"), "by": by}));
            }
        }
    }

    fn on_commit(&mut self, height: u64, now: SimTime) {
        let Some(block) = self.uncommitted.remove(&height) else { return };
        let price = self.reference_price();
        for (tx, receipt) in block.txs {
            match tx.kind {
                TxKind::Mint { .. } => {
                    if let Some((p, result)) = self.issuance.on_mint_receipt(tx.id, &receipt, &mut self.vault) {
                        if p.request == 0 {
                            if result.is_err() {
                                self.mm.rebalance_failed(RebalanceAction::Mint(p.amount), price);
                            }
                        } else {
                            self.finish_wf(p.request, result, now);
                        }
                    }
                }
                TxKind::Burn { .. } => {
                    if let Some((wf, result)) = self.issuance.on_burn_receipt(tx.id, &receipt, &mut self.vault) {
                        match result {
                            BurnResult::Redeemed => self.finish_wf(wf, Ok(()), now),
                            BurnResult::Retry(p) => self.held_burns.push(p),
                            BurnResult::Failed(e) => self.finish_wf(wf, Err(e), now),
                        }
                    }
                }
                TxKind::Transfer { .. } => {
                    if let Some(s) = self.settle_txs.remove(&tx.id) {
                        match &receipt {
                            Receipt::Accepted => {
                                for wf in s.workflows {
                                    self.finish_wf(wf, Ok(()), now);
                                }
                            }
                            Receipt::Reverted(r) if r == TRADING_HALTED => self.held_settlements.push(s),
                            Receipt::Reverted(r) => {
                                for wf in s.workflows {
                                    self.finish_wf(wf, Err(WorkflowError::Reverted(r.clone())), now);
                                }
                            }
                        }
                    } else if let Some(action) = self.rebalance_txs.remove(&tx.id) {
                        if let RebalanceAction::FromCold(a) = action {
                            self.cold_pending_out = self.cold_pending_out.saturating_sub(a);
                        }
                        if !receipt.is_accepted() {
                            self.mm.rebalance_failed(action, price);
                            self.log.emit(now, "market_maker", "rebalance_failed", json!({"receipt": format!("{receipt:?}")}));
                        }
                    }
                }
                TxKind::SetReserve { amount } => {
                    if let Some(pos) = self.reveal_txs.iter().position(|t| *t == tx.id) {
                        self.reveal_txs.remove(pos);
                        if self.reveal_at.is_none() && amount + self.ledger.epsilon() < self.ledger.total_supply() {
                            self.reveal_at = Some(now);
                        }
                    }
                }
                TxKind::PostPrice { .. } | TxKind::Governance { .. } => {}
            }
        }
        if let Some(wfs) = self.zero_net.remove(&height) {
            for wf in wfs {
                self.finish_wf(wf, Ok(()), now);
            }
        }
    }

    // ---- risk ----

    fn on_risk_cycle(&mut self, now: SimTime) {
        let backlog = self.risk.queue().backlog_ms(now);
        if backlog == 0 {
            self.on_risk_eval(now);
        } else {
            self.at(now + backlog, priority::RISK, Ev::RiskEval);
        }
        self.at(now + self.cfg.risk.cycle_ms, priority::RISK, Ev::RiskCycle);
    }

    fn log_alert(&mut self, idx: usize, now: SimTime) {
        let a = self.risk.alert(idx).clone();
        self.log.emit(now, "risk", "alert", json!({"index": idx, "alert": a}));
    }

    fn on_risk_eval(&mut self, now: SimTime) {
        let was_paused = self.ledger.trading_paused();
        let report = self.risk.cycle(now, &mut self.ledger, &self.oracle);
        for &idx in &report.raised {
            let kind = self.risk.alert(idx).kind;
            let onset = match kind {
                k if k.is_oracle() => self.oracle_fault_onset,
                AlertKind::ReserveShortfall => self.reveal_at.or(self.vault_fault_onset),
                _ => Some(now),
            };
            if let Some(t) = onset.filter(|t| *t <= now) {
                self.risk.set_onset(idx, t);
            }
            if kind.is_oracle() {
                self.feed_switches.push((now.as_millis(), FeedId::Secondary.to_string()));
            }
            self.log_alert(idx, now);
        }
        for &idx in &report.cleared {
            if self.risk.alert(idx).kind.is_oracle() {
                self.feed_switches.push((now.as_millis(), FeedId::Primary.to_string()));
            }
            self.log.emit(now, "risk", "alert_cleared", json!({"index": idx}));
        }
        if report.tripped && !was_paused {
            self.open_halt(now, "oracle_alert");
        }
        if report.froze {
            self.issuance.set_frozen(true);
        }
    }

    // ---- market ----

    fn on_tick(&mut self, now: SimTime) {
        if now > SimTime::ZERO {
            self.oracle.step_price(now, &mut self.rng.price);
        }
        for sample in self.oracle.publish(now, &mut self.rng.noise) {
            self.ledger.submit_tx(Address::ORACLE_RELAY, TxKind::PostPrice { sample }, now);
        }
        let reference = self.reference_price();
        self.mm.observe_price(reference);
        let halted = self.ledger.trading_paused();
        if halted {
            self.mm.withdraw_quotes(&mut self.exchange);
        } else {
            let q = self.mm.quote_cycle(reference, now, &mut self.exchange);
            self.trades += q.trades.len() as u64;
        }
        self.sample(now, reference, halted);
        self.at(now + 1000, priority::AGENT, Ev::MarketTick);
    }

    fn sample(&mut self, now: SimTime, reference: f64, halted: bool) {
        let book = self.exchange.book();
        let depth = book.depth_within(0.01).ok();
        let second = now.as_millis() / 1000;
        let util = if second == 0 { 0.0 } else { self.risk.queue().utilization(second - 1) };
        self.samples.push(MetricSample {
            t_ms: now.as_millis(),
            mid: book.mid(),
            spread_frac: book.spread_frac(),
            bid_depth_oz: depth.map(|d| d.0.as_oz()),
            ask_depth_oz: depth.map(|d| d.1.as_oz()),
            mm_inventory_oz: self.mm.inventory_oz(),
            tps: self.last_accepted,
            risk_util: util,
            half_spread: self.mm.last_half_spread(),
            reference_price: reference,
            regime_sigma: self.cfg.price_process.sigma_at(now),
            halted,
        });
    }

    fn on_attest(&mut self, now: SimTime) {
        let a = self.vault.issue_attestation(now);
        let tx = self.ledger.submit_tx(a.auditor, TxKind::SetReserve { amount: a.reported_oz }, now);
        if self.vault.active_fault().is_some() {
            self.reveal_txs.push(tx);
        }
        self.log.emit(now, "vault", "attestation", json!({"reported": a.reported_oz, "physical": self.vault.total_oz()}));
        self.at(now + self.cfg.attestation_interval_ms, priority::AGENT, Ev::Attest);
    }

    // ---- external ----

    fn on_fault_start(&mut self, i: usize, now: SimTime) {
        let f = self.cfg.fault_schedule[i].clone();
        match (f.target, f.kind) {
            (FaultTarget::Oracle, FaultKind::Stuck) => {
                self.oracle.inject_fault(f.feed, FeedFault::Stuck { since: now });
                self.oracle_fault_onset = Some(now);
            }
            (FaultTarget::Oracle, _) => {
                self.oracle.inject_fault(f.feed, FeedFault::Spoofed { offset_fraction: f.magnitude, since: now });
                self.oracle_fault_onset = Some(now);
            }
            (FaultTarget::Vault, _) => {
                self.vault.inject_misreport(f.magnitude, now);
                self.vault_fault_onset = Some(now);
                self.reveal_at = None;
            }
        }
        self.log.emit(now, "fault", "fault_start", json!({"fault": f}));
        self.at(now + f.duration_ms, priority::EXTERNAL, Ev::FaultEnd(i));
    }

    fn on_fault_end(&mut self, i: usize, now: SimTime) {
        let f = self.cfg.fault_schedule[i].clone();
        match f.target {
            FaultTarget::Oracle => {
                let sample = self.oracle.restore(f.feed, now);
                self.ledger.submit_tx(Address::ORACLE_RELAY, TxKind::PostPrice { sample }, now);
            }
            FaultTarget::Vault => self.vault.clear_fault(),
        }
        self.log.emit(now, "fault", "fault_end", json!({"index": i}));
    }

    fn on_gov(&mut self, i: usize, now: SimTime) {
        let step = self.cfg.governance_schedule[i].clone();
        self.ledger.submit_tx(step.sender, TxKind::Governance { action: step.action.clone() }, now);
        self.log.emit(now, "governance", "submitted", json!({"sender": step.sender, "action": step.action}));
    }

    fn on_operator(&mut self, i: usize, now: SimTime) {
        match self.cfg.operator_schedule[i].op.clone() {
            OperatorOp::ClearReserveFreeze => self.clear_freeze(now, "operator"),
            OperatorOp::DepositGold { oz: amount } => {
                self.vault.deposit_physical(oz(amount));
                self.log.emit(now, "vault", "deposit", json!({"oz": amount}));
            }
        }
    }

    // ---- summary ----

    fn finish(mut self) -> RunOutput {
        let quiet = self.issuance.pending_mints() == 0 && self.issuance.pending_burns() == 0 && self.held_burns.is_empty();
        if quiet && self.vault.allocated_oz().micro().abs_diff(self.ledger.total_supply().micro()) > 100 {
            let msg = format!("vault allocation {} != supply {}", self.vault.allocated_oz(), self.ledger.total_supply());
            self.violation(self.end, msg);
        }
        let summary = self.summarize();
        RunOutput { summary, samples: self.samples, log: self.log }
    }

    fn summarize(&mut self) -> MetricsSummary {
        let warm = self.cfg.warmup_ms;
        let mut latency = BTreeMap::new();
        let (mut all_lat, mut all_agent, mut all_done, mut all_failed) = (Vec::new(), Vec::new(), 0, BTreeMap::new());
        for (kind, s) in self.orch.stats() {
            latency.insert(
                kind.name().to_string(),
                LatencyStats::from_samples(s.completed, s.failed.clone(), &s.latencies_ms, &s.agent_ms),
            );
            if *kind != ActionKind::Onboard {
                all_lat.extend_from_slice(&s.latencies_ms);
                all_agent.extend_from_slice(&s.agent_ms);
                all_done += s.completed;
                for (k, v) in &s.failed {
                    *all_failed.entry(k.clone()).or_insert(0) += v;
                }
            }
        }
        let post: Vec<&MetricSample> = self.samples.iter().filter(|s| s.t_ms >= warm && s.t_ms > 0).collect();
        let n = post.len().max(1) as f64;
        let tps_mean = post.iter().map(|s| s.tps as f64).sum::<f64>() / n;
        let risk_util_mean = post.iter().map(|s| s.risk_util).sum::<f64>() / n;
        let risk_util_max = post.iter().map(|s| s.risk_util).fold(0.0, f64::max);

        let mut m = MarketStats {
            samples: self.samples.len() as u64,
            rebalances: self.mm.rebalances(),
            rebalance_min_trigger_oz: self.rebalance_min_trigger,
            trades: self.trades,
            ..Default::default()
        };
        for s in &self.samples {
            m.inventory_min_oz = m.inventory_min_oz.min(s.mm_inventory_oz);
            m.inventory_max_oz = m.inventory_max_oz.max(s.mm_inventory_oz);
            if s.halted || !s.quoting_both() {
                continue;
            }
            m.quoted_samples += 1;
            let spread = s.spread_frac.unwrap_or(0.0);
            if (0.002 - 1e-6..=0.005 + 1e-6).contains(&spread) {
                m.spread_in_calm_band += 1;
            }
            if spread <= 0.01 + 1e-6 {
                m.spread_at_most_1pct += 1;
            }
            m.spread_max = Some(m.spread_max.map_or(spread, |x: f64| x.max(spread)));
            let bd = s.bid_depth_oz.unwrap_or(0.0);
            let ad = s.ask_depth_oz.unwrap_or(0.0);
            m.min_bid_depth_oz = Some(m.min_bid_depth_oz.map_or(bd, |x: f64| x.min(bd)));
            m.min_ask_depth_oz = Some(m.min_ask_depth_oz.map_or(ad, |x: f64| x.min(ad)));
            if let Some(mid) = s.mid {
                if (mid - s.reference_price).abs() / s.reference_price > s.half_spread + PEG_TOLERANCE {
                    m.peg_violations += 1;
                }
            }
        }

        let mut c = ComplianceStats::default();
        let mut auto = Vec::new();
        for user in &self.screened {
            let Some(d) = self.compliance.decision(*user) else { continue };
            match d.outcome {
                ComplianceOutcome::Approved => {
                    c.approved += 1;
                    auto.push(d.processing_time_ms as f64);
                }
                ComplianceOutcome::ManualReview => {
                    c.manual_review += 1;
                    let r = d.review_resolved_at.map(|t| t.since(d.decided_at)).unwrap_or(0);
                    c.manual_max_resolution_ms = Some(c.manual_max_resolution_ms.map_or(r, |x| x.max(r)));
                }
                ComplianceOutcome::Denied => c.denied += 1,
            }
        }
        if !auto.is_empty() {
            c.auto_mean_processing_ms = Some(auto.iter().sum::<f64>() / auto.len() as f64);
        }

        MetricsSummary {
            scenario: self.cfg.name.clone(),
            seed: self.cfg.seed,
            duration_ms: self.cfg.duration_ms,
            warmup_ms: warm,
            digest: self.log.digest(),
            events: self.log.len(),
            tps_definition: TPS_DEFINITION.to_string(),
            tps_peak: self.samples.iter().map(|s| s.tps).max().unwrap_or(0),
            tps_mean,
            latency,
            latency_all: LatencyStats::from_samples(all_done, all_failed, &all_lat, &all_agent),
            risk_util_mean,
            risk_util_max,
            market: m,
            alerts: self.risk.alerts().to_vec(),
            halts: self.halts.clone(),
            trades_during_halt: self.trades_during_halt,
            feed_switches: self.feed_switches.clone(),
            compliance: c,
            invariant_violations: self.violations.len() as u64,
            violation_messages: self.violations.clone(),
            final_state: self.ledger.snapshot(),
            vault: VaultStats {
                total_oz: self.vault.total_oz().as_oz(),
                allocated_oz: self.vault.allocated_oz().as_oz(),
                locked_oz: self.vault.locked_oz().as_oz(),
            },
        }
    }
}

/// Runs a scenario to completion.
pub fn run(cfg: ScenarioConfig) -> RunOutput {
    World::new(cfg, true).run()
}

/// Same run without retaining log records; the digest is still computed.
pub fn run_digest_only(cfg: ScenarioConfig) -> RunOutput {
    World::new(cfg, false).run()
}
