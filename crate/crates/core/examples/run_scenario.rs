//! cargo run --example run_scenario -- [scenario] [out_dir]
//!
//! Runs a bundled scenario (default `oracle-stuck`) and writes metrics.csv,
//! alerts.csv, summary.json and events.jsonl.

use std::path::PathBuf;

use ozsim::harness::{run, scenarios, write_run};

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "oracle-stuck".into());
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join(format!("ozsim-{name}")));

    let cfg = match scenarios::load(&name) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}; bundled: {}", scenarios::names().collect::<Vec<_>>().join(", "));
            std::process::exit(1);
        }
    };
    println!("{}: {}", cfg.name, cfg.description);
    let result = run(cfg);
    write_run(&out, &result).expect("write outputs");

    let s = &result.summary;
    println!("digest {}  records {}", s.digest, s.events);
    println!("tps mean {:.1} peak {}  risk util {:.3}", s.tps_mean, s.tps_peak, s.risk_util_mean);
    for (kind, l) in &s.latency {
        println!("  {kind:<8} done {:>6} failed {:>4} mean {:>8.1} ms p50 {:?}", l.completed, l.failures(), l.mean_ms.unwrap_or(0.0), l.p50_ms);
    }
    for a in &s.alerts {
        println!("  alert {:?} {} onset {:?} latency {:?} ms", a.kind, a.subject, a.onset.map(|t| t.as_millis()), a.detection_latency_ms);
    }
    for h in &s.halts {
        println!("  halt {} ms -> {:?} ({})", h.tripped_at_ms, h.lifted_at_ms, h.reason);
    }
    println!("outputs in {}", out.display());
}
