//! One PASS/FAIL line per acceptance criterion. Every tolerance is a named
//! constant below.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use ozsim::agents::{AlertKind, RiskAgent, RiskConfig};
use ozsim::governance::GovernanceConfig;
use ozsim::harness::bench::bench;
use ozsim::harness::{run, run_digest_only, scenarios, RunOutput, ScenarioConfig};
use ozsim::ledger::{Ledger, LedgerConfig, Receipt, TxKind, RESERVE_CEILING_EXCEEDED};
use ozsim::oracle::{Oracle, PriceProcess};
use ozsim::sim::{EventLogRecord, RngStream, SimTime};
use ozsim::units::{Address, TokenAmount};

const FUZZ_SEQUENCES: usize = 100_000;
const FUZZ_OPS: usize = 24;

const ORACLE_DETECT_MIN_MS: u64 = 10_000;
const ORACLE_DETECT_MAX_MS: u64 = 11_000;
const HALT_MS: u64 = 300_000;
const HALT_TOL_MS: u64 = 1_000;

const VAULT_DETECT_MAX_MS: u64 = 1_000;

const ISSUANCE_MIN_COUNT: u64 = 500;
const ISSUANCE_MEAN_MS: f64 = 1_200.0;
const ISSUANCE_MEAN_TOL_MS: f64 = 100.0;
const ISSUANCE_AGENT_MS: f64 = 400.0;
const ISSUANCE_CHAIN_MS: f64 = 800.0;
const ISSUANCE_PART_TOL_MS: f64 = 100.0;

const BURST_REQUESTS: u64 = 120;

const CALM_BAND_SHARE: f64 = 0.90;
const MIN_DEPTH_OZ: f64 = 200.0;

const INVENTORY_BAND_OZ: f64 = 100.0;
const REBALANCE_TRIGGER_OZ: f64 = 50.0;

const AUTO_APPROVAL_MIN: f64 = 2.8;
const AUTO_APPROVAL_TOL_MIN: f64 = 0.2;
const MANUAL_REVIEW_MAX_MS: u64 = 2 * 3_600_000;

const SCALING_COUNTS: [usize; 10] = [1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000, 9000, 10000];
const TPS_MONOTONE_SLACK: f64 = 0.005;
const UTIL_AT_10K: f64 = 0.85;
const UTIL_TOL: f64 = 0.05;
const MEDIAN_10K_MS: f64 = 1_500.0;
const MEDIAN_1K_MS: f64 = 1_000.0;
const MEDIAN_TOL_MS: f64 = 150.0;
const PEAK_TPS: f64 = 5_200.0;
const PEAK_TPS_TOL: f64 = 0.15;

const LIVENESS_DEPTH: usize = 5;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn records_of<'a>(out: &'a RunOutput, source: &'a str, kind: &'a str) -> impl Iterator<Item = &'a EventLogRecord> + 'a {
    out.log.records().iter().filter(move |r| r.source == source && r.kind == kind)
}

fn done_of<'a>(out: &'a RunOutput, action: &'a str) -> impl Iterator<Item = &'a EventLogRecord> + 'a {
    records_of(out, "orchestrator", "workflow_done").filter(move |r| r.detail["action"] == action)
}

// ---- 1: reserve safety ----

/// Randomized tx/attestation sequences against a shadow model of the ceiling rule.
fn reserve_safety() -> Verdict {
    let mut rng = RngStream::new(2024, "reserve-fuzz");
    let users: Vec<Address> = (0..4).map(Address::user).collect();
    let (mut mints_ok, mut mints_rejected, mut violations, mut disagreements) = (0u64, 0u64, 0u64, 0u64);
    for _ in 0..FUZZ_SEQUENCES {
        let reserve0 = rng.random_range(0..2_000_000_000u64);
        let supply0 = rng.random_range(0..=reserve0);
        let mut ledger = Ledger::new(LedgerConfig::default(), GovernanceConfig::default())
            .with_genesis([(users[0], TokenAmount(supply0))], TokenAmount(reserve0));
        let eps = rng.random_range(0..=reserve0 / 1000);
        ledger.params_mut().set(ozsim::ledger::params::ParamKey::Epsilon, eps, TokenAmount(reserve0)).unwrap();
        let mut t = 0u64;
        let mut i = 0;
        while i < FUZZ_OPS {
            let batch = rng.random_range(1..=4);
            for _ in 0..batch {
                let kind = match rng.random_range(0..10) {
                    0..=4 => TxKind::Mint {
                        recipient: users[rng.random_range(0..4)],
                        amount: TokenAmount(rng.random_range(1..=200_000_000)),
                        batch: String::new(),
                    },
                    5 => TxKind::Burn { owner: users[rng.random_range(0..4)], amount: TokenAmount(rng.random_range(1..=100_000_000)) },
                    6 | 7 => TxKind::Transfer {
                        from: users[rng.random_range(0..4)],
                        to: users[rng.random_range(0..4)],
                        amount: TokenAmount(rng.random_range(1..=100_000_000)),
                    },
                    _ => TxKind::SetReserve { amount: TokenAmount(rng.random_range(0..2_000_000_000)) },
                };
                let sender = match &kind {
                    TxKind::Mint { .. } | TxKind::Burn { .. } => Address::ISSUANCE_AGENT,
                    TxKind::Transfer { from, .. } => *from,
                    _ => Address::AUDITOR,
                };
                ledger.submit_tx(sender, kind, SimTime(t));
                i += 1;
            }
            t += 1000;
            // shadow state before the block
            let mut supply = ledger.total_supply().micro();
            let mut reserve = ledger.attested_reserve().micro();
            let out = ledger.produce_block(SimTime(t));
            for (tx, receipt) in &out.block.txs {
                match &tx.kind {
                    TxKind::Mint { amount, .. } => {
                        let allowed = supply + amount.micro() <= reserve + eps;
                        match receipt {
                            Receipt::Accepted => {
                                mints_ok += 1;
                                if !allowed {
                                    violations += 1;
                                }
                                supply += amount.micro();
                            }
                            Receipt::Reverted(r) => {
                                mints_rejected += 1;
                                if allowed || r != RESERVE_CEILING_EXCEEDED {
                                    disagreements += 1;
                                }
                            }
                        }
                    }
                    TxKind::Burn { amount, .. } if receipt.is_accepted() => supply -= amount.micro(),
                    TxKind::SetReserve { amount } if receipt.is_accepted() => reserve = amount.micro(),
                    _ => {}
                }
            }
            for m in &out.block.accepted_mints {
                if m.supply_before + m.amount > m.attested_reserve + m.epsilon {
                    violations += 1;
                }
            }
            let sum: u64 = ledger.balances().values().map(|b| b.micro()).sum();
            if sum != ledger.total_supply().micro() || supply != sum {
                violations += 1;
            }
        }
    }
    verdict(
        violations == 0 && disagreements == 0,
        format!(
            "{FUZZ_SEQUENCES} sequences, {mints_ok} mints accepted, {mints_rejected} rejected, {violations} violations, {disagreements} shadow disagreements"
        ),
    )
}

// ---- 2: oracle fault ----

fn oracle_fault(stuck: &RunOutput, spoof: &RunOutput) -> Verdict {
    let s = &stuck.summary;
    let Some(alert) = s.alerts.iter().find(|a| a.kind.is_oracle()) else {
        return verdict(false, "no oracle alert");
    };
    let latency = alert.detection_latency_ms.unwrap_or(u64::MAX);
    let detect_ok = (ORACLE_DETECT_MIN_MS..=ORACLE_DETECT_MAX_MS).contains(&latency);
    let switched = s.feed_switches.iter().any(|(t, f)| *t == alert.raised_at.as_millis() && f == "secondary");
    let halt = s.halts.first();
    let halt_ms = halt.and_then(|h| h.lifted_at_ms.map(|l| l - h.tripped_at_ms));
    let halt_ok = s.halts.len() == 1 && halt_ms.is_some_and(|d| d.abs_diff(HALT_MS) <= HALT_TOL_MS);
    let lifted_at = halt.and_then(|h| h.lifted_at_ms).unwrap_or(u64::MAX);
    let resumed = done_of(stuck, "buy").any(|r| r.t.as_millis() > lifted_at);
    let no_trades = s.trades_during_halt == 0;
    let spoof_ok = spoof.summary.alerts.iter().any(|a| a.kind == AlertKind::OracleDiverged)
        && spoof.summary.feed_switches.iter().any(|(_, f)| f == "secondary")
        && spoof.summary.halts.len() == 1
        && spoof.summary.trades_during_halt == 0;
    verdict(
        detect_ok && switched && halt_ok && no_trades && resumed && spoof_ok,
        format!(
            "stuck: latency {latency} ms, switched {switched}, halt {halt_ms:?} ms, trades in halt {}, resumed {resumed}; spoof detected+switched+halted {spoof_ok}",
            s.trades_during_halt
        ),
    )
}

// ---- 3: vault misreport ----

fn vault_fault(out: &RunOutput) -> Verdict {
    let s = &out.summary;
    let Some(alert) = s.alerts.iter().find(|a| a.kind == AlertKind::ReserveShortfall) else {
        return verdict(false, "no reserve alert");
    };
    let latency = alert.detection_latency_ms.unwrap_or(u64::MAX);
    let raised = alert.raised_at.as_millis();
    let cleared = alert.cleared_at.map_or(u64::MAX, |t| t.as_millis());
    let frozen_failures = s.latency.get("issue").and_then(|l| l.failed.get("IssuanceFrozen")).copied().unwrap_or(0);
    let issued_in_freeze = done_of(out, "issue").filter(|r| (raised..cleared).contains(&r.t.as_millis())).count();
    let trades_in_freeze = ["buy", "sell"]
        .iter()
        .flat_map(|a| done_of(out, a))
        .filter(|r| (raised..cleared).contains(&r.t.as_millis()))
        .count();
    let rejected_early: Vec<u64> = records_of(out, "risk", "clear_rejected").map(|r| r.t.as_millis()).collect();
    let corrected = records_of(out, "ledger", "reserve_attested")
        .filter(|r| r.t.as_millis() > raised)
        .find(|r| r.detail["amount"].as_u64().unwrap_or(0) >= s.final_state.total_supply.micro())
        .map(|r| r.t.as_millis());
    let clear_after_correction = corrected.is_some_and(|c| cleared > c) && !rejected_early.is_empty();
    verdict(
        latency < VAULT_DETECT_MAX_MS
            && frozen_failures > 0
            && issued_in_freeze == 0
            && trades_in_freeze > 0
            && clear_after_correction
            && s.halts.is_empty(),
        format!(
            "latency {latency} ms, {frozen_failures} issues ended IssuanceFrozen, {issued_in_freeze} issued while frozen, {trades_in_freeze} trades settled while frozen, clear rejected at {rejected_early:?}, corrected attestation at {corrected:?}, cleared at {cleared}"
        ),
    )
}

// ---- 4, 5: issuance ----

fn issuance_latency(out: &RunOutput) -> Verdict {
    let l = &out.summary.latency["issue"];
    let mean = l.mean_ms.unwrap_or(0.0);
    let agent = l.agent_mean_ms.unwrap_or(0.0);
    let chain = mean - agent;
    verdict(
        l.completed >= ISSUANCE_MIN_COUNT
            && within(mean, ISSUANCE_MEAN_MS, ISSUANCE_MEAN_TOL_MS)
            && within(agent, ISSUANCE_AGENT_MS, ISSUANCE_PART_TOL_MS)
            && within(chain, ISSUANCE_CHAIN_MS, ISSUANCE_PART_TOL_MS),
        format!("{} issuances, mean {mean:.0} ms = agent {agent:.0} ms + chain {chain:.0} ms", l.completed),
    )
}

fn issuance_burst(out: &RunOutput) -> Verdict {
    let s = &out.summary;
    verdict(
        s.issuance_successes() == BURST_REQUESTS && s.issuance_failures() == 0,
        format!("{} successes, {} failures", s.issuance_successes(), s.issuance_failures()),
    )
}

// ---- 6, 7: market ----

fn market_quality(stable: &RunOutput, volatile: &RunOutput) -> Verdict {
    let a = &stable.summary.market;
    let b = &volatile.summary.market;
    let calm_share = a.spread_in_calm_band as f64 / a.quoted_samples.max(1) as f64;
    let depth = |m: &ozsim::harness::metrics::MarketStats| {
        m.min_bid_depth_oz.unwrap_or(0.0).min(m.min_ask_depth_oz.unwrap_or(0.0))
    };
    let volatile_all = b.spread_at_most_1pct == b.quoted_samples && b.quoted_samples > 0;
    verdict(
        calm_share >= CALM_BAND_SHARE
            && volatile_all
            && depth(a) >= MIN_DEPTH_OZ
            && depth(b) >= MIN_DEPTH_OZ
            && a.peg_violations == 0
            && b.peg_violations == 0,
        format!(
            "stable: {:.1}% in [0.2%, 0.5%], min depth {:.0} OZ, peg violations {}; volatile: max spread {:.3}%, {}/{} within 1%, min depth {:.0} OZ, peg violations {}",
            calm_share * 100.0,
            depth(a),
            a.peg_violations,
            b.spread_max.unwrap_or(0.0) * 100.0,
            b.spread_at_most_1pct,
            b.quoted_samples,
            depth(b),
            b.peg_violations
        ),
    )
}

fn inventory_control(out: &RunOutput) -> Verdict {
    let m = &out.summary.market;
    let trigger = m.rebalance_min_trigger_oz.unwrap_or(f64::INFINITY);
    verdict(
        m.inventory_min_oz >= -INVENTORY_BAND_OZ
            && m.inventory_max_oz <= INVENTORY_BAND_OZ
            && trigger >= REBALANCE_TRIGGER_OZ
            && m.rebalances > 0
            && out.summary.duration_ms >= 86_400_000,
        format!(
            "inventory range [{:.1}, {:.1}] OZ over {} samples, {} rebalances, smallest trigger {trigger:.2} OZ",
            m.inventory_min_oz, m.inventory_max_oz, m.samples, m.rebalances
        ),
    )
}

// ---- 8, 9: compliance, concentration ----

fn compliance(corpus: &RunOutput, extended: &RunOutput) -> Verdict {
    let c = &corpus.summary.compliance;
    let mean_min = extended.summary.compliance.auto_mean_processing_ms.unwrap_or(0.0) / 60_000.0;
    let cfg = scenarios::load("compliance-corpus").unwrap();
    let spec = cfg.compliance.corpus.unwrap();
    let review_ok = c.manual_max_resolution_ms.is_some_and(|r| r <= MANUAL_REVIEW_MAX_MS);
    let onboarded = corpus.summary.latency.get("onboard").map_or(0, |l| l.completed);
    verdict(
        c.approved == 48
            && c.manual_review == 2
            && c.denied == 1
            && spec.sanctioned == 1
            && spec.bad_docs == 0
            && review_ok
            && onboarded == 50
            && extended.summary.compliance.approved == 10_000
            && within(mean_min, AUTO_APPROVAL_MIN, AUTO_APPROVAL_TOL_MIN),
        format!(
            "{} approved, {} manual review (slowest {:?} ms), {} denied (sanctioned); 10k corpus mean auto-approval {mean_min:.3} min",
            c.approved, c.manual_review, c.manual_max_resolution_ms, c.denied
        ),
    )
}

fn concentration(out: &RunOutput) -> Verdict {
    let flags: Vec<_> = out.summary.alerts.iter().filter(|a| a.kind == AlertKind::Concentration).collect();
    let exact_holders_quiet = flags.iter().all(|a| a.subject.starts_with(&Address::user(0).to_string()));
    let flag_only = flags.iter().all(|a| a.action_taken == "flagged") && out.summary.halts.is_empty();
    verdict(
        flags.len() == 1 && exact_holders_quiet && flag_only,
        format!(
            "{} concentration alert(s): {:?}; holders at exactly 20% not flagged: {exact_holders_quiet}",
            flags.len(),
            flags.iter().map(|a| a.subject.clone()).collect::<Vec<_>>()
        ),
    )
}

// ---- 10: scaling ----

fn scaling() -> Verdict {
    let cfg = scenarios::load("scaling").unwrap();
    let r = bench(&cfg, &SCALING_COUNTS).unwrap();
    let first = &r.rows[0];
    let last = r.rows.last().unwrap();
    let med = |row: &ozsim::harness::BenchRow| row.median_latency_ms.unwrap_or(0) as f64;
    let monotone = r.tps_non_decreasing(TPS_MONOTONE_SLACK);
    let plateau_ok = r.plateau_onset_users.is_some() && r.plateau_onset_users == r.saturation_users;
    verdict(
        monotone
            && plateau_ok
            && within(last.risk_util, UTIL_AT_10K, UTIL_TOL)
            && within(med(last), MEDIAN_10K_MS, MEDIAN_TOL_MS)
            && within(med(first), MEDIAN_1K_MS, MEDIAN_TOL_MS)
            && within(r.peak_tps, PEAK_TPS, PEAK_TPS * PEAK_TPS_TOL),
        format!(
            "peak {:.0} tx/s, plateau onset {:?}, first util > 0.8 at {:?}, 10k util {:.3} median {} ms, 1k median {} ms, monotone {monotone}",
            r.peak_tps,
            r.plateau_onset_users,
            r.saturation_users,
            last.risk_util,
            med(last),
            med(first)
        ),
    )
}

// ---- 11: liveness ----

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    FaultOnset,
    ShortAttestation,
    CoveringAttestation,
    Clear,
    CooldownExpiry,
    GovernanceUnpause,
}

const STEPS: [Step; 6] = [
    Step::FaultOnset,
    Step::ShortAttestation,
    Step::CoveringAttestation,
    Step::Clear,
    Step::CooldownExpiry,
    Step::GovernanceUnpause,
];

struct Machine {
    ledger: Ledger,
    risk: RiskAgent,
    oracle: Oracle,
    noise: RngStream,
    now: SimTime,
}

impl Machine {
    fn new() -> Self {
        let ledger = Ledger::new(LedgerConfig::default(), GovernanceConfig::default())
            .with_genesis([(Address::user(0), TokenAmount::from_oz(100)), (Address::user(1), TokenAmount::from_oz(100)), (Address::user(2), TokenAmount::from_oz(100)), (Address::user(3), TokenAmount::from_oz(100)), (Address::user(4), TokenAmount::from_oz(100)), (Address::user(5), TokenAmount::from_oz(100))], TokenAmount::from_oz(1000));
        Machine {
            ledger,
            risk: RiskAgent::new(RiskConfig { concentration_limit: 0.5, ..RiskConfig::default() }),
            oracle: Oracle::new(PriceProcess::default(), 0.0, SimTime::ZERO),
            noise: RngStream::new(0, "liveness"),
            now: SimTime::ZERO,
        }
    }

    fn operational(&self) -> bool {
        !self.ledger.trading_paused() && !self.ledger.issuance_paused()
    }

    fn tick(&mut self, ms: u64) {
        self.now = self.now + ms;
        for s in self.oracle.publish(self.now, &mut self.noise) {
            self.ledger.submit_tx(Address::ORACLE_RELAY, TxKind::PostPrice { sample: s }, self.now);
        }
        self.ledger.produce_block(self.now);
        self.risk.cycle(self.now, &mut self.ledger, &self.oracle);
    }

    fn apply(&mut self, step: Step) {
        let supply = self.ledger.total_supply();
        match step {
            Step::FaultOnset => self.ledger.trip_breaker(self.now),
            Step::ShortAttestation => {
                self.ledger.set_attested_reserve(supply - TokenAmount::from_oz(5), Address::AUDITOR).unwrap();
            }
            Step::CoveringAttestation => {
                self.ledger.set_attested_reserve(supply + TokenAmount::from_oz(5), Address::AUDITOR).unwrap();
            }
            Step::Clear => {
                let _ = self.risk.request_clear(self.now, &mut self.ledger);
            }
            Step::CooldownExpiry => {
                let cooldown = self.ledger.params().cooldown_ms();
                self.tick(cooldown);
                return;
            }
            Step::GovernanceUnpause => {
                self.ledger.governance_unpause();
            }
        }
        self.tick(1000);
    }
}

fn replay_steps(steps: &[Step]) -> Machine {
    let mut m = Machine::new();
    for s in steps {
        m.apply(*s);
    }
    m
}

/// Exhaustive interleavings up to `LIVENESS_DEPTH`. From every reached
/// state the recovery path must end operational, and every halted state
/// must have at least one step that changes the pause flags.
fn liveness() -> Verdict {
    let mut sequences = 0u64;
    let mut halted_states = 0u64;
    let mut stuck = Vec::new();
    let mut frontier: Vec<Vec<Step>> = vec![Vec::new()];
    for _ in 0..LIVENESS_DEPTH {
        let mut next = Vec::new();
        for prefix in &frontier {
            for s in STEPS {
                let mut seq = prefix.clone();
                seq.push(s);
                sequences += 1;
                let m = replay_steps(&seq);
                if !m.operational() {
                    halted_states += 1;
                    let mut rec = replay_steps(&seq);
                    for r in [Step::CoveringAttestation, Step::Clear, Step::CooldownExpiry] {
                        rec.apply(r);
                    }
                    let flags = (m.ledger.trading_paused(), m.ledger.issuance_paused());
                    let can_move = STEPS.iter().any(|&e| {
                        let mut n = replay_steps(&seq);
                        n.apply(e);
                        (n.ledger.trading_paused(), n.ledger.issuance_paused()) != flags
                    });
                    if !rec.operational() || !can_move {
                        stuck.push(seq.clone());
                    }
                }
                if seq.len() < LIVENESS_DEPTH {
                    next.push(seq);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    verdict(
        stuck.is_empty() && halted_states > 0,
        format!("{sequences} interleavings, {halted_states} halted states, {} without recovery: {:?}", stuck.len(), stuck.first()),
    )
}

// ---- 12: governance ----

fn outcomes(out: &RunOutput) -> Vec<(u64, String)> {
    records_of(out, "governance", "outcome")
        .map(|r| (r.t.as_millis(), r.detail["outcome"].as_str().unwrap_or("").to_string()))
        .collect()
}

fn governance(with: &RunOutput, without: &RunOutput) -> Verdict {
    let o = outcomes(with);
    let changed = o.iter().find(|(_, s)| s.starts_with("ParamChanged")).map(|(t, _)| *t);
    let trips_after = with.summary.halts.iter().filter(|h| changed.is_some_and(|c| h.tripped_at_ms > c)).count();
    let behavior_changed = trips_after > 0 && without.summary.halts.is_empty();
    let early_failed = records_of(with, "governance", "failed").any(|r| r.t.as_millis() < changed.unwrap_or(0));
    let oob_alert = with.summary.alerts.iter().any(|a| a.kind == AlertKind::GovernanceOutOfBounds);
    let signed: Vec<&String> = o.iter().filter(|(_, s)| s.starts_with("UpdateSigned") || s.starts_with("UpdateApproved")).map(|(_, s)| s).collect();
    let m_of_n = signed.len() == 3
        && signed[0].contains("signatures: 1")
        && signed[1].contains("signatures: 1")
        && signed[2].starts_with("UpdateApproved");
    verdict(
        changed.is_some() && behavior_changed && early_failed && oob_alert && m_of_n,
        format!(
            "param changed at {changed:?} ms, {trips_after} trips after vs {} without the change, early execution rejected {early_failed}, out-of-bounds alert {oob_alert}, 2-of-3 needed two distinct signers {m_of_n}",
            without.summary.halts.len()
        ),
    )
}

// ---- 13, 14 ----

fn determinism(first: &BTreeMap<&'static str, String>) -> Verdict {
    let results: Vec<(&str, bool, bool)> = scenarios::names()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|name| {
            let cfg = scenarios::load(name).unwrap();
            let again = run_digest_only(cfg.clone()).summary.digest;
            let other = run_digest_only(ScenarioConfig { seed: cfg.seed + 1, ..cfg }).summary.digest;
            (name, again == first[name], other != first[name])
        })
        .collect();
    let bad: Vec<_> = results.iter().filter(|(_, same, differ)| !same || !differ).map(|(n, _, _)| *n).collect();
    verdict(bad.is_empty(), format!("{} scenarios reproduce and change with the seed; failing: {bad:?}", results.len()))
}

fn no_false_halt(out: &RunOutput) -> Verdict {
    let bad = out.summary.alerts.iter().filter(|a| a.kind.is_oracle() || a.kind == AlertKind::ReserveShortfall).count();
    verdict(
        bad == 0 && out.summary.halts.is_empty() && out.summary.invariant_violations == 0,
        format!("{bad} oracle/reserve alerts, {} halts over 24 h", out.summary.halts.len()),
    )
}

fn main() {
    let names: Vec<&'static str> = scenarios::names().filter(|n| *n != "scaling").collect();
    let runs: BTreeMap<&'static str, RunOutput> =
        names.par_iter().map(|n| (*n, run(scenarios::load(n).unwrap()))).collect();
    let mut gov_without = scenarios::load("governance").unwrap();
    gov_without.governance_schedule.retain(|s| !(s.at_ms == 200_000));
    let (gov_without, (scaling_v, (fuzz_v, live_v))) = rayon::join(
        || run(gov_without),
        || rayon::join(scaling, || rayon::join(reserve_safety, liveness)),
    );
    let mut digests: BTreeMap<&'static str, String> = runs.iter().map(|(n, r)| (*n, r.summary.digest.clone())).collect();
    digests.insert("scaling", run_digest_only(scenarios::load("scaling").unwrap()).summary.digest);

    let r = |n: &str| &runs[n];
    let verdicts = [
        ("reserve safety", fuzz_v),
        ("oracle fault", oracle_fault(r("oracle-stuck"), r("oracle-spoof"))),
        ("vault misreport", vault_fault(r("vault-misreport"))),
        ("issuance latency", issuance_latency(r("issuance-latency"))),
        ("issuance burst", issuance_burst(r("issuance-burst"))),
        ("market quality", market_quality(r("market-stable"), r("market-volatile"))),
        ("inventory control", inventory_control(r("default-24h"))),
        ("compliance corpus", compliance(r("compliance-corpus"), r("compliance-extended"))),
        ("concentration", concentration(r("concentration"))),
        ("scaling shape", scaling_v),
        ("liveness", live_v),
        ("governance", governance(r("governance"), &gov_without)),
        ("determinism", determinism(&digests)),
        ("no false halt", no_false_halt(r("default-24h"))),
    ];
    let mut failed = Vec::new();
    for (i, (name, v)) in verdicts.iter().enumerate() {
        println!("{} {:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
        if !v.pass {
            failed.push(i + 1);
        }
    }
    for (n, run) in &runs {
        assert_eq!(run.summary.invariant_violations, 0, "{n}: {:?}", run.summary.violation_messages);
    }
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria pass", verdicts.len(), verdicts.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
