//! Scaling benchmark: one independent run per user count.

use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::harness::config::ScenarioConfig;
use crate::harness::metrics::TPS_DEFINITION;
use crate::harness::world::run_digest_only;

/// Utilization above which the risk agent is treated as saturated.
pub const SATURATION_UTIL: f64 = 0.8;
/// A row is on the plateau once its TPS is within this fraction of the best.
pub const PLATEAU_FRACTION: f64 = 0.95;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub users: usize,
    /// Mean ledger-accepted tx/s after warm-up.
    pub tps: f64,
    pub tps_peak: u64,
    pub median_latency_ms: Option<u64>,
    pub p95_latency_ms: Option<u64>,
    pub risk_util: f64,
    pub completed: u64,
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub scenario: String,
    pub seed: u64,
    pub tps_definition: String,
    pub rows: Vec<BenchRow>,
    pub peak_tps: f64,
    /// First count whose TPS is within `PLATEAU_FRACTION` of every later row's best.
    pub plateau_onset_users: Option<usize>,
    /// First count whose risk utilization exceeds `SATURATION_UTIL`.
    pub saturation_users: Option<usize>,
}

impl BenchReport {
    pub fn row(&self, users: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.users == users)
    }

    pub fn tps_non_decreasing(&self, slack: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].tps >= w[0].tps * (1.0 - slack))
    }
}

fn plateau_onset(rows: &[BenchRow]) -> Option<usize> {
    let peak = rows.iter().map(|r| r.tps).fold(0.0, f64::max);
    if peak <= 0.0 {
        return None;
    }
    // the plateau must persist: every later row also stays near the peak
    (0..rows.len())
        .find(|&i| rows[i..].iter().all(|r| r.tps >= PLATEAU_FRACTION * peak))
        .filter(|&i| i + 1 < rows.len())
        .map(|i| rows[i].users)
}

pub fn bench(cfg: &ScenarioConfig, counts: &[usize]) -> Result<BenchReport, ConfigError> {
    if counts.is_empty() || counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConfigError::Invalid(vec!["users: counts must be non-empty and strictly ascending".into()]));
    }
    cfg.validate()?;
    let rows: Vec<BenchRow> = counts
        .par_iter()
        .map(|&users| {
            let mut c = cfg.clone();
            c.user_count = users;
            let out = run_digest_only(c);
            let s = out.summary;
            BenchRow {
                users,
                tps: s.tps_mean,
                tps_peak: s.tps_peak,
                median_latency_ms: s.latency_all.p50_ms,
                p95_latency_ms: s.latency_all.p95_ms,
                risk_util: s.risk_util_mean,
                completed: s.latency_all.completed,
                digest: s.digest,
            }
        })
        .collect();
    Ok(BenchReport {
        scenario: cfg.name.clone(),
        seed: cfg.seed,
        tps_definition: TPS_DEFINITION.to_string(),
        peak_tps: rows.iter().map(|r| r.tps).fold(0.0, f64::max),
        plateau_onset_users: plateau_onset(&rows),
        saturation_users: rows.iter().find(|r| r.risk_util > SATURATION_UTIL).map(|r| r.users),
        rows,
    })
}

pub fn write_report(dir: &Path, report: &BenchReport) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("bench.csv"))?;
    w.write_record(["users", "tps", "tps_peak", "median_latency_ms", "p95_latency_ms", "risk_util", "completed"])?;
    for r in &report.rows {
        w.write_record([
            r.users.to_string(),
            format!("{:.1}", r.tps),
            r.tps_peak.to_string(),
            r.median_latency_ms.map(|v| v.to_string()).unwrap_or_default(),
            r.p95_latency_ms.map(|v| v.to_string()).unwrap_or_default(),
            format!("{:.4}", r.risk_util),
            r.completed.to_string(),
        ])?;
    }
    w.flush()?;
    std::fs::write(dir.join("bench.json"), serde_json::to_string_pretty(report).map_err(io::Error::other)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(users: usize, tps: f64) -> BenchRow {
        BenchRow {
            users,
            tps,
            tps_peak: tps as u64,
            median_latency_ms: None,
            p95_latency_ms: None,
            risk_util: 0.0,
            completed: 0,
            digest: String::new(),
        }
    }

    #[test]
    fn plateau_needs_a_flat_tail() {
        let rows = [row(1, 100.0), row(2, 200.0), row(3, 290.0), row(4, 300.0), row(5, 299.0)];
        assert_eq!(plateau_onset(&rows), Some(3));
        let rising = [row(1, 100.0), row(2, 200.0), row(3, 300.0)];
        assert_eq!(plateau_onset(&rising), None);
    }

    #[test]
    fn counts_must_ascend() {
        let cfg = crate::harness::scenarios::load("scaling").unwrap();
        assert!(bench(&cfg, &[2, 1]).is_err());
        assert!(bench(&cfg, &[]).is_err());
    }
}
