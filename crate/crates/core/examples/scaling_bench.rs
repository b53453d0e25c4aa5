//! cargo run --release --example scaling_bench -- [counts]
//!
//! Throughput and latency of the `scaling` scenario as the user count grows.

use ozsim::harness::bench::{bench, SATURATION_UTIL};
use ozsim::harness::scenarios;

fn main() {
    let counts: Vec<usize> = std::env::args()
        .nth(1)
        .map(|s| s.split(',').map(|c| c.trim().parse().expect("user count")).collect())
        .unwrap_or_else(|| (1..=10).map(|k| k * 1000).collect());
    let cfg = scenarios::load("scaling").unwrap();
    let report = bench(&cfg, &counts).expect("ascending counts");

    println!("{:>6} {:>8} {:>9} {:>9} {:>6}", "users", "tps", "p50 ms", "p95 ms", "util");
    for r in &report.rows {
        let mark = if r.risk_util > SATURATION_UTIL { " *" } else { "" };
        println!(
            "{:>6} {:>8.1} {:>9} {:>9} {:>6.3}{mark}",
            r.users,
            r.tps,
            r.median_latency_ms.unwrap_or(0),
            r.p95_latency_ms.unwrap_or(0),
            r.risk_util
        );
    }
    println!("peak {:.0} tx/s, plateau from {:?} users (* = risk agent saturated)", report.peak_tps, report.plateau_onset_users);
}
