use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ozsim::error::ConfigError;
use ozsim::harness::bench::{bench, write_report};
use ozsim::harness::replay::{verify_file, ReplayError, ReplayVerdict};
use ozsim::harness::{run, scenarios, write_run, ScenarioConfig};

const OK: u8 = 0;
const CONFIG_ERROR: u8 = 1;
const CHECK_FAILED: u8 = 2;
const NONDETERMINISM: u8 = 3;

#[derive(Parser)]
#[command(name = "ozsim", version, about = "Gold-backed token exchange simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write its outputs.
    Run {
        /// Scenario file, or the name of a bundled scenario.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scenario once per user count.
    Bench {
        #[arg(long)]
        scenario: String,
        #[arg(long, value_delimiter = ',', default_value = "1000,2000,3000,4000,5000,6000,7000,8000,9000,10000")]
        users: Vec<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify an events.jsonl by re-running its embedded config.
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
    /// Bundled scenarios.
    Scenarios {
        #[command(subcommand)]
        cmd: ScenariosCmd,
    },
}

#[derive(Subcommand)]
enum ScenariosCmd {
    List,
}

fn load(arg: &str, seed: Option<u64>) -> Result<ScenarioConfig, ConfigError> {
    let path = Path::new(arg);
    let mut cfg = if path.exists() { ScenarioConfig::load(path)? } else { scenarios::load(arg)? };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn config_error(e: ConfigError) -> ExitCode {
    eprintln!("config error: {e}");
    if let ConfigError::Invalid(msgs) = &e {
        for m in msgs {
            eprintln!("  {m}");
        }
    }
    ExitCode::from(CONFIG_ERROR)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run { scenario, seed, out } => {
            let cfg = match load(&scenario, seed) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            let result = run(cfg);
            if let Err(e) = write_run(&out, &result) {
                eprintln!("writing {}: {e}", out.display());
                return ExitCode::from(CONFIG_ERROR);
            }
            let s = &result.summary;
            println!("scenario {} seed {} digest {}", s.scenario, s.seed, s.digest);
            println!("events {} peak tps {} alerts {} halts {}", s.events, s.tps_peak, s.alerts.len(), s.halts.len());
            if s.invariant_violations > 0 {
                for m in &s.violation_messages {
                    eprintln!("invariant violated: {m}");
                }
                return ExitCode::from(CHECK_FAILED);
            }
            ExitCode::from(OK)
        }
        Cmd::Bench { scenario, users, seed, out } => {
            let cfg = match load(&scenario, seed) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            let report = match bench(&cfg, &users) {
                Ok(r) => r,
                Err(e) => return config_error(e),
            };
            if let Err(e) = write_report(&out, &report) {
                eprintln!("writing {}: {e}", out.display());
                return ExitCode::from(CONFIG_ERROR);
            }
            println!("# tps: {}", report.tps_definition);
            println!("{:>7} {:>9} {:>10} {:>8}", "users", "tps", "median_ms", "util");
            for r in &report.rows {
                let med = r.median_latency_ms.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
                println!("{:>7} {:>9.1} {:>10} {:>8.3}", r.users, r.tps, med, r.risk_util);
            }
            println!("peak tps {:.1}", report.peak_tps);
            match report.plateau_onset_users {
                Some(u) => println!("plateau onset {u} users"),
                None => println!("no plateau"),
            }
            ExitCode::from(OK)
        }
        Cmd::Replay { log } => match verify_file(&log) {
            Ok(ReplayVerdict::Match { digest, records }) => {
                println!("match: {records} records, digest {digest}");
                ExitCode::from(OK)
            }
            Ok(ReplayVerdict::DigestMismatch { expected, actual, stage }) => {
                eprintln!("digest mismatch ({stage:?}): expected {expected}, got {actual}");
                ExitCode::from(NONDETERMINISM)
            }
            Err(ReplayError::Config(e)) => config_error(e),
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(CONFIG_ERROR)
            }
        },
        Cmd::Scenarios { cmd: ScenariosCmd::List } => {
            for name in scenarios::names() {
                let desc = scenarios::load(name).map(|c| c.description).unwrap_or_default();
                println!("{name:<22} {desc}");
            }
            ExitCode::from(OK)
        }
    }
}
