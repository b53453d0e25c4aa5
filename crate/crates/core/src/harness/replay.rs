//! Log verification by re-execution, and pairwise log diffs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ConfigError;
use crate::harness::config::ScenarioConfig;
use crate::harness::output::TRAILER_KIND;
use crate::harness::world::{run, run_digest_only};
use crate::sim::{digest_lines, EventLogRecord};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReplayVerdict {
    Match { digest: String, records: usize },
    DigestMismatch { expected: String, actual: String, stage: MismatchStage },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MismatchStage {
    /// The file does not hash to its own trailer.
    Integrity,
    /// Re-running the embedded config produced a different log.
    Rerun,
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed log: {0}")]
    Malformed(String),
    #[error("embedded config: {0}")]
    Config(#[from] ConfigError),
}

pub fn verify_file(path: &Path) -> Result<ReplayVerdict, ReplayError> {
    verify_text(&std::fs::read_to_string(path)?)
}

pub fn verify_text(text: &str) -> Result<ReplayVerdict, ReplayError> {
    let lines: Vec<&str> = text.lines().collect();
    let (trailer, body) = lines.split_last().ok_or_else(|| ReplayError::Malformed("empty log".into()))?;
    let trailer: EventLogRecord =
        serde_json::from_str(trailer).map_err(|e| ReplayError::Malformed(format!("trailer: {e}")))?;
    if trailer.kind != TRAILER_KIND {
        return Err(ReplayError::Malformed("last line is not a trailer".into()));
    }
    let expected = trailer
        .detail
        .get("digest")
        .and_then(|v| v.as_str())
        .ok_or_else(|| ReplayError::Malformed("trailer has no digest".into()))?
        .to_string();
    let actual = digest_lines(body.iter().copied());
    if actual != expected {
        return Ok(ReplayVerdict::DigestMismatch { expected, actual, stage: MismatchStage::Integrity });
    }
    let header: EventLogRecord = serde_json::from_str(body.first().ok_or_else(|| ReplayError::Malformed("no header".into()))?)
        .map_err(|e| ReplayError::Malformed(format!("header: {e}")))?;
    let config = header.detail.get("config").ok_or_else(|| ReplayError::Malformed("header has no config".into()))?;
    let cfg = ScenarioConfig::from_json(&config.to_string())?;
    let rerun = run_digest_only(cfg).summary.digest;
    if rerun == expected {
        Ok(ReplayVerdict::Match { digest: expected, records: body.len() })
    } else {
        Ok(ReplayVerdict::DigestMismatch { expected, actual: rerun, stage: MismatchStage::Rerun })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LogDiff {
    pub left_records: usize,
    pub right_records: usize,
    /// Index of the first record that differs, if any.
    pub first_divergence: Option<usize>,
    pub first_divergence_t_ms: Option<u64>,
    /// Per `source/kind`: (left count, right count), only where they differ.
    pub kind_deltas: BTreeMap<String, (usize, usize)>,
}

impl LogDiff {
    pub fn identical(&self) -> bool {
        self.first_divergence.is_none()
    }
}

fn kind_counts(log: &[EventLogRecord]) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for r in log {
        *m.entry(format!("{}/{}", r.source, r.kind)).or_default() += 1;
    }
    m
}

/// Compares two logs record by record, ignoring the headers.
pub fn diff_logs(left: &[EventLogRecord], right: &[EventLogRecord]) -> LogDiff {
    let body = |l: &[EventLogRecord]| l.iter().skip(1).cloned().collect::<Vec<_>>();
    let (l, r) = (body(left), body(right));
    let first = l.iter().zip(&r).position(|(a, b)| a != b).or_else(|| (l.len() != r.len()).then(|| l.len().min(r.len())));
    let t = first.and_then(|i| l.get(i).or_else(|| r.get(i))).map(|rec| rec.t.as_millis());
    let (lc, rc) = (kind_counts(&l), kind_counts(&r));
    let mut kind_deltas = BTreeMap::new();
    for k in lc.keys().chain(rc.keys()) {
        let pair = (lc.get(k).copied().unwrap_or(0), rc.get(k).copied().unwrap_or(0));
        if pair.0 != pair.1 {
            kind_deltas.insert(k.clone(), pair);
        }
    }
    LogDiff {
        left_records: l.len(),
        right_records: r.len(),
        first_divergence: first.map(|i| i + 1),
        first_divergence_t_ms: t,
        kind_deltas,
    }
}

/// Runs a scenario with and without its fault schedule and diffs the logs.
pub fn fault_diff(cfg: &ScenarioConfig) -> LogDiff {
    let mut clean = cfg.clone();
    clean.fault_schedule.clear();
    diff_logs(run(cfg.clone()).log.records(), run(clean).log.records())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::output::events_jsonl;
    use crate::harness::scenarios;

    fn short(name: &str, ms: u64) -> ScenarioConfig {
        let mut cfg = scenarios::load(name).unwrap();
        cfg.duration_ms = ms;
        cfg.warmup_ms = 0;
        cfg.fault_schedule.retain(|f| f.start_ms + f.duration_ms <= ms);
        cfg
    }

    #[test]
    fn untouched_log_matches() {
        let text = events_jsonl(&run(short("market-stable", 30_000)).log);
        assert!(matches!(verify_text(&text).unwrap(), ReplayVerdict::Match { .. }));
    }

    #[test]
    fn flipped_byte_in_config_is_caught() {
        let text = events_jsonl(&run(short("market-stable", 30_000)).log);
        let pos = text.find("\"user_count\":").unwrap() + "\"user_count\":".len();
        let mut bytes = text.into_bytes();
        bytes[pos] = if bytes[pos] == b'6' { b'7' } else { b'6' };
        let tampered = String::from_utf8(bytes).unwrap();
        match verify_text(&tampered).unwrap() {
            ReplayVerdict::DigestMismatch { stage, .. } => assert_eq!(stage, MismatchStage::Integrity),
            v => panic!("expected mismatch, got {v:?}"),
        }
    }

    #[test]
    fn missing_trailer_is_malformed() {
        let log = run(short("market-stable", 5_000)).log;
        assert!(matches!(verify_text(&log.to_jsonl()), Err(ReplayError::Malformed(_))));
    }

    #[test]
    fn diff_of_identical_runs_is_empty() {
        let cfg = short("market-stable", 20_000);
        let d = diff_logs(run(cfg.clone()).log.records(), run(cfg).log.records());
        assert!(d.identical());
        assert!(d.kind_deltas.is_empty());
    }
}
