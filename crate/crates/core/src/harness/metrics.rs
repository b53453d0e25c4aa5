//! Per-second samples, the run summary, and the flat-file writers.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::RiskAlert;
use crate::ledger::LedgerSnapshot;

pub const TPS_DEFINITION: &str =
    "ledger-accepted transactions per simulated second: settlement transfers, mints, burns and price posts";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub t_ms: u64,
    pub mid: Option<f64>,
    pub spread_frac: Option<f64>,
    pub bid_depth_oz: Option<f64>,
    pub ask_depth_oz: Option<f64>,
    pub mm_inventory_oz: f64,
    pub tps: u64,
    pub risk_util: f64,
    pub half_spread: f64,
    pub reference_price: f64,
    pub regime_sigma: f64,
    pub halted: bool,
}

impl MetricSample {
    pub fn quoting_both(&self) -> bool {
        self.bid_depth_oz.is_some_and(|d| d > 0.0) && self.ask_depth_oz.is_some_and(|d| d > 0.0)
    }
}

/// Nearest-rank percentile of an unsorted sample; `None` when empty.
pub fn percentile(values: &[u64], p: f64) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let rank = ((p / 100.0) * v.len() as f64).ceil().max(1.0) as usize;
    Some(v[rank.min(v.len()) - 1])
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub completed: u64,
    pub failed: BTreeMap<String, u64>,
    pub mean_ms: Option<f64>,
    pub p50_ms: Option<u64>,
    pub p95_ms: Option<u64>,
    pub p99_ms: Option<u64>,
    /// Mean time before the first ledger submission.
    pub agent_mean_ms: Option<f64>,
}

impl LatencyStats {
    pub fn from_samples(completed: u64, failed: BTreeMap<String, u64>, latencies: &[u64], agent: &[u64]) -> Self {
        let mean = |v: &[u64]| (!v.is_empty()).then(|| v.iter().sum::<u64>() as f64 / v.len() as f64);
        LatencyStats {
            completed,
            failed,
            mean_ms: mean(latencies),
            p50_ms: percentile(latencies, 50.0),
            p95_ms: percentile(latencies, 95.0),
            p99_ms: percentile(latencies, 99.0),
            agent_mean_ms: mean(agent),
        }
    }

    pub fn failures(&self) -> u64 {
        self.failed.values().sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MarketStats {
    pub samples: u64,
    pub quoted_samples: u64,
    /// Quoted samples whose total spread lies in [0.2%, 0.5%].
    pub spread_in_calm_band: u64,
    pub spread_at_most_1pct: u64,
    pub spread_max: Option<f64>,
    pub min_bid_depth_oz: Option<f64>,
    pub min_ask_depth_oz: Option<f64>,
    /// Unhalted samples where |mid - reference| / reference exceeded the half-spread.
    pub peg_violations: u64,
    pub inventory_min_oz: f64,
    pub inventory_max_oz: f64,
    pub rebalances: u64,
    /// Smallest |inventory| at which a rebalance fired.
    pub rebalance_min_trigger_oz: Option<f64>,
    pub trades: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplianceStats {
    pub approved: u64,
    pub manual_review: u64,
    pub denied: u64,
    pub auto_mean_processing_ms: Option<f64>,
    pub manual_max_resolution_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaltRecord {
    pub tripped_at_ms: u64,
    pub lifted_at_ms: Option<u64>,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VaultStats {
    pub total_oz: f64,
    pub allocated_oz: f64,
    pub locked_oz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub scenario: String,
    pub seed: u64,
    pub duration_ms: u64,
    pub warmup_ms: u64,
    pub digest: String,
    pub events: usize,
    pub tps_definition: String,
    pub tps_peak: u64,
    /// Mean over samples after warm-up.
    pub tps_mean: f64,
    pub latency: BTreeMap<String, LatencyStats>,
    /// Trading and issuance workflows combined.
    pub latency_all: LatencyStats,
    pub risk_util_mean: f64,
    pub risk_util_max: f64,
    pub market: MarketStats,
    pub alerts: Vec<RiskAlert>,
    pub halts: Vec<HaltRecord>,
    pub trades_during_halt: u64,
    pub feed_switches: Vec<(u64, String)>,
    pub compliance: ComplianceStats,
    pub invariant_violations: u64,
    pub violation_messages: Vec<String>,
    pub final_state: LedgerSnapshot,
    pub vault: VaultStats,
}

impl MetricsSummary {
    pub fn issuance_successes(&self) -> u64 {
        self.latency.get("issue").map_or(0, |s| s.completed)
    }

    pub fn issuance_failures(&self) -> u64 {
        self.latency.get("issue").map_or(0, LatencyStats::failures)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn write_metrics_csv(path: &Path, samples: &[MetricSample]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t_ms", "mid", "spread_frac", "bid_depth_oz", "ask_depth_oz", "mm_inventory_oz", "tps", "risk_util"])?;
    for s in samples {
        w.write_record([
            s.t_ms.to_string(),
            opt(s.mid),
            s.spread_frac.map(|x| format!("{x:.8}")).unwrap_or_default(),
            opt(s.bid_depth_oz),
            opt(s.ask_depth_oz),
            format!("{:.6}", s.mm_inventory_oz),
            s.tps.to_string(),
            format!("{:.4}", s.risk_util),
        ])?;
    }
    w.flush()
}

pub fn write_alerts_csv(path: &Path, alerts: &[RiskAlert]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["kind", "onset_ms", "detected_ms", "latency_ms", "action"])?;
    for a in alerts {
        w.write_record([
            format!("{:?}", a.kind),
            a.onset.map(|t| t.as_millis().to_string()).unwrap_or_default(),
            a.raised_at.as_millis().to_string(),
            a.detection_latency_ms.map(|l| l.to_string()).unwrap_or_default(),
            a.action_taken.clone(),
        ])?;
    }
    w.flush()
}

pub fn write_summary(path: &Path, summary: &MetricsSummary) -> io::Result<()> {
    fs::write(path, serde_json::to_string_pretty(summary).map_err(io::Error::other)?)
}
