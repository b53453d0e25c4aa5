//! Verifies a run log by re-execution, shows that an edited log is caught,
//! and diffs a faulted run against its fault-free twin.

use ozsim::harness::output::events_jsonl;
use ozsim::harness::replay::{fault_diff, verify_text};
use ozsim::harness::{run, scenarios};

fn main() {
    let cfg = scenarios::load("vault-misreport").unwrap();
    let text = events_jsonl(&run(cfg.clone()).log);
    println!("fresh log: {:?}", verify_text(&text).unwrap());

    // drop one trade record from the body
    let mut lines: Vec<&str> = text.lines().collect();
    let victim = lines.iter().position(|l| l.contains("\"workflow_done\"")).unwrap();
    lines.remove(victim);
    let edited = lines.join("\n");
    println!("edited log: {:?}", verify_text(&edited).unwrap());

    let d = fault_diff(&cfg);
    println!(
        "with vs without the fault: {} vs {} records, first divergence at record {:?} (t = {:?} ms)",
        d.left_records, d.right_records, d.first_divergence, d.first_divergence_t_ms
    );
    for (kind, (with, without)) in d.kind_deltas.iter().take(12) {
        println!("  {kind:<32} {with:>6} {without:>6}");
    }
}
