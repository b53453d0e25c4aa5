//! Risk control: oracle health, reserve coverage, holder concentration,
//! governance bounds, and the finite-capacity screening queue every user
//! action passes through.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ledger::Ledger;
use crate::oracle::{DetectionThresholds, Divergence, FeedId, Oracle};
use crate::sim::SimTime;
use crate::units::{Address, Ppm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RiskConfig {
    pub cycle_ms: u64,
    pub staleness_ms: u64,
    pub divergence: f64,
    pub concentration_limit: f64,
    /// Monitoring checks per second the agent can perform.
    pub service_rate: f64,
    /// Fraction of capacity the agent admits user actions up to.
    pub admission_throttle: f64,
    /// Checks per second spent on its own monitoring, outside the user queue.
    pub background_rate: f64,
    pub trip_on_oracle_alert: bool,
}

impl Default for RiskConfig {
    fn default() -> Self {
        RiskConfig {
            cycle_ms: 1000,
            staleness_ms: 10_000,
            divergence: 0.005,
            concentration_limit: 0.20,
            service_rate: 6118.0,
            admission_throttle: 0.85,
            background_rate: 0.0,
            trip_on_oracle_alert: true,
        }
    }
}

impl RiskConfig {
    pub fn thresholds(&self) -> DetectionThresholds {
        DetectionThresholds { staleness_ms: self.staleness_ms, divergence: self.divergence }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AlertKind {
    OracleStale,
    OracleDiverged,
    ReserveShortfall,
    Concentration,
    GovernanceOutOfBounds,
}

impl AlertKind {
    pub fn is_oracle(self) -> bool {
        matches!(self, AlertKind::OracleStale | AlertKind::OracleDiverged)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskAlert {
    pub kind: AlertKind,
    pub subject: String,
    pub raised_at: SimTime,
    pub onset: Option<SimTime>,
    pub detection_latency_ms: Option<u64>,
    pub action_taken: String,
    pub cleared_at: Option<SimTime>,
}

/// Deterministic-rate FIFO. Admission runs at `throttle * mu - background`,
/// so utilization never exceeds the throttle.
#[derive(Debug, Clone)]
pub struct ScreeningQueue {
    service_rate: f64,
    background_rate: f64,
    interval_ns: u64,
    free_at_ns: u64,
    completions: BTreeMap<u64, u64>,
    admitted: u64,
}

impl ScreeningQueue {
    pub fn new(cfg: &RiskConfig) -> Self {
        let admit_rate = (cfg.admission_throttle * cfg.service_rate - cfg.background_rate).max(1e-9);
        ScreeningQueue {
            service_rate: cfg.service_rate,
            background_rate: cfg.background_rate,
            interval_ns: (1e9 / admit_rate).round().max(1.0) as u64,
            free_at_ns: 0,
            completions: BTreeMap::new(),
            admitted: 0,
        }
    }

    /// Enqueues one action; returns when its screening completes.
    pub fn admit(&mut self, now: SimTime) -> SimTime {
        let start = self.free_at_ns.max(now.as_millis() * 1_000_000);
        self.free_at_ns = start + self.interval_ns;
        self.admitted += 1;
        let done_ms = self.free_at_ns.div_ceil(1_000_000);
        *self.completions.entry(done_ms / 1000).or_default() += 1;
        SimTime(done_ms)
    }

    /// Work queued ahead of a new arrival at `now`.
    pub fn backlog_ms(&self, now: SimTime) -> u64 {
        (self.free_at_ns / 1_000_000).saturating_sub(now.as_millis())
    }

    pub fn admitted(&self) -> u64 {
        self.admitted
    }

    /// Utilization over sim second `second` (completions plus background).
    pub fn utilization(&mut self, second: u64) -> f64 {
        let done = self.completions.get(&second).copied().unwrap_or(0);
        self.completions.retain(|s, _| *s > second);
        (done as f64 + self.background_rate) / self.service_rate
    }
}

#[derive(Debug)]
pub struct RiskAgent {
    config: RiskConfig,
    alerts: Vec<RiskAlert>,
    oracle_alert: Option<usize>,
    reserve_alert: Option<usize>,
    flagged: BTreeSet<Address>,
    queue: ScreeningQueue,
}

impl RiskAgent {
    pub fn new(config: RiskConfig) -> Self {
        let queue = ScreeningQueue::new(&config);
        RiskAgent { config, alerts: Vec::new(), oracle_alert: None, reserve_alert: None, flagged: BTreeSet::new(), queue }
    }

    pub fn config(&self) -> &RiskConfig {
        &self.config
    }

    pub fn alerts(&self) -> &[RiskAlert] {
        &self.alerts
    }

    pub fn alert(&self, idx: usize) -> &RiskAlert {
        &self.alerts[idx]
    }

    pub fn queue(&mut self) -> &mut ScreeningQueue {
        &mut self.queue
    }

    pub fn reserve_freeze_active(&self) -> bool {
        self.reserve_alert.is_some()
    }

    pub fn oracle_alert_active(&self) -> bool {
        self.oracle_alert.is_some()
    }

    /// Records the fault onset for an alert and derives its latency.
    pub fn set_onset(&mut self, idx: usize, onset: SimTime) {
        let a = &mut self.alerts[idx];
        a.onset = Some(onset);
        a.detection_latency_ms = Some(a.raised_at.since(onset));
    }

    fn raise(&mut self, kind: AlertKind, subject: String, now: SimTime, action: &str) -> usize {
        self.alerts.push(RiskAlert {
            kind,
            subject,
            raised_at: now,
            onset: None,
            detection_latency_ms: None,
            action_taken: action.to_string(),
            cleared_at: None,
        });
        self.alerts.len() - 1
    }

    /// One monitoring pass. Returns indices of alerts raised or cleared.
    pub fn cycle(&mut self, now: SimTime, ledger: &mut Ledger, oracle: &Oracle) -> CycleReport {
        let mut report = CycleReport::default();
        self.check_oracle(now, ledger, oracle, &mut report);
        self.check_reserve(now, ledger, &mut report);
        self.check_concentration(now, ledger, &mut report);
        report
    }

    fn check_oracle(&mut self, now: SimTime, ledger: &mut Ledger, oracle: &Oracle, report: &mut CycleReport) {
        let verdict = oracle.detect(now, &self.config.thresholds());
        match (verdict, self.oracle_alert) {
            (Divergence::None, Some(idx)) => {
                self.alerts[idx].cleared_at = Some(now);
                self.oracle_alert = None;
                ledger.set_reference_feed(FeedId::Primary);
                report.cleared.push(idx);
            }
            (Divergence::Stale | Divergence::Diverged, None) => {
                let kind = if verdict == Divergence::Stale { AlertKind::OracleStale } else { AlertKind::OracleDiverged };
                ledger.set_reference_feed(FeedId::Secondary);
                let action = if self.config.trip_on_oracle_alert {
                    ledger.trip_breaker(now);
                    report.tripped = true;
                    "switched to secondary feed; breaker tripped"
                } else {
                    "switched to secondary feed"
                };
                let idx = self.raise(kind, FeedId::Primary.to_string(), now, action);
                self.oracle_alert = Some(idx);
                report.raised.push(idx);
            }
            _ => {}
        }
    }

    fn check_reserve(&mut self, now: SimTime, ledger: &mut Ledger, report: &mut CycleReport) {
        if self.reserve_alert.is_some() {
            return;
        }
        if ledger.total_supply() > ledger.attested_reserve() + ledger.epsilon() {
            ledger.set_issuance_paused(true);
            let subject = format!("supply {} > reserve {}", ledger.total_supply(), ledger.attested_reserve());
            let idx = self.raise(AlertKind::ReserveShortfall, subject, now, "issuance frozen");
            self.reserve_alert = Some(idx);
            report.raised.push(idx);
            report.froze = true;
        }
    }

    fn check_concentration(&mut self, now: SimTime, ledger: &Ledger, report: &mut CycleReport) {
        let supply = ledger.total_supply().micro() as u128;
        if supply == 0 {
            return;
        }
        let limit = Ppm::from_fraction(self.config.concentration_limit).0 as u128;
        let mut over = BTreeSet::new();
        for (addr, bal) in ledger.balances() {
            if addr.is_user() && bal.micro() as u128 * 1_000_000 > limit * supply {
                over.insert(*addr);
            }
        }
        for addr in &over {
            if !self.flagged.contains(addr) {
                let share = ledger.balance(*addr).micro() as f64 / supply as f64;
                let idx = self.raise(AlertKind::Concentration, format!("{addr} holds {:.2}%", share * 100.0), now, "flagged");
                report.raised.push(idx);
            }
        }
        self.flagged = over;
    }

    /// Lifts the reserve freeze if the latest attestation covers supply.
    pub fn request_clear(&mut self, now: SimTime, ledger: &mut Ledger) -> Result<usize, ClearRejected> {
        let idx = self.reserve_alert.ok_or(ClearRejected::NoActiveFreeze)?;
        if ledger.total_supply() > ledger.attested_reserve() + ledger.epsilon() {
            return Err(ClearRejected::StillShort);
        }
        ledger.set_issuance_paused(false);
        self.alerts[idx].cleared_at = Some(now);
        self.reserve_alert = None;
        Ok(idx)
    }

    pub fn on_governance_out_of_bounds(&mut self, now: SimTime, detail: String) -> usize {
        self.raise(AlertKind::GovernanceOutOfBounds, detail, now, "proposal rejected")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClearRejected {
    NoActiveFreeze,
    StillShort,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CycleReport {
    pub raised: Vec<usize>,
    pub cleared: Vec<usize>,
    pub tripped: bool,
    pub froze: bool,
}
