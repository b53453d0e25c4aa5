//! Writes a finished run to its output directory.

use std::fs;
use std::io;
use std::path::Path;

use serde_json::json;

use crate::harness::metrics::{write_alerts_csv, write_metrics_csv, write_summary};
use crate::harness::world::RunOutput;
use crate::sim::EventLog;

pub const TRAILER_KIND: &str = "trailer";

/// The log as JSON lines followed by a trailer carrying the digest of
/// every preceding line.
pub fn events_jsonl(log: &EventLog) -> String {
    let mut out = log.to_jsonl();
    let t = log.records().last().map(|r| r.t.as_millis()).unwrap_or(0);
    let trailer = json!({
        "t": t,
        "source": "harness",
        "kind": TRAILER_KIND,
        "detail": {"digest": log.digest(), "records": log.len()},
    });
    out.push_str(&trailer.to_string());
    out.push('\n');
    out
}

pub fn write_run(dir: &Path, run: &RunOutput) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_metrics_csv(&dir.join("metrics.csv"), &run.samples)?;
    write_alerts_csv(&dir.join("alerts.csv"), &run.summary.alerts)?;
    write_summary(&dir.join("summary.json"), &run.summary)?;
    fs::write(dir.join("events.jsonl"), events_jsonl(&run.log))
}
