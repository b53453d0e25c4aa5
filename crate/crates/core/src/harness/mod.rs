//! Scenario runner: wires the ledger, oracle, vault, exchange and agents
//! into one discrete-event world and collects its metrics.

pub mod bench;
pub mod config;
pub mod metrics;
pub mod output;
pub mod profiles;
pub mod replay;
pub mod scenarios;
pub mod world;

pub use bench::{bench, BenchReport, BenchRow};
pub use config::ScenarioConfig;
pub use metrics::{MetricSample, MetricsSummary};
pub use output::write_run;
pub use replay::{diff_logs, verify_file, LogDiff, ReplayVerdict};
pub use world::{run, run_digest_only, RunOutput, World};
