//! A stuck primary feed: the risk agent flags it after the staleness
//! window, switches the reference feed and halts trading; the halt lifts
//! on its own once the cooldown has passed.

use ozsim::agents::{RiskAgent, RiskConfig};
use ozsim::governance::GovernanceConfig;
use ozsim::ledger::{Ledger, LedgerConfig, TxKind};
use ozsim::oracle::{FeedFault, FeedId, Oracle, PriceProcess};
use ozsim::sim::{RngStream, SimTime};
use ozsim::units::{Address, TokenAmount};

fn main() {
    let mut ledger = Ledger::new(LedgerConfig::default(), GovernanceConfig::default())
        .with_genesis((0..10).map(|i| (Address::user(i), TokenAmount::from_oz(5))), TokenAmount::from_oz(100));
    let mut oracle = Oracle::new(PriceProcess::default(), 1e-4, SimTime::ZERO);
    let mut risk = RiskAgent::new(RiskConfig::default());
    let (mut price_rng, mut noise_rng) = (RngStream::new(9, "price"), RngStream::new(9, "noise"));

    let fault_at = 60_000;
    let mut was_paused = false;
    for s in 1..=480u64 {
        let now = SimTime(s * 1000);
        if now.as_millis() == fault_at {
            oracle.inject_fault(FeedId::Primary, FeedFault::Stuck { since: now });
            println!("t={s}s primary feed stuck");
        }
        if now.as_millis() == fault_at + 120_000 {
            let sample = oracle.restore(FeedId::Primary, now);
            ledger.submit_tx(Address::ORACLE_RELAY, TxKind::PostPrice { sample }, now);
            println!("t={s}s primary feed restored");
        }
        oracle.step_price(now, &mut price_rng);
        for sample in oracle.publish(now, &mut noise_rng) {
            ledger.submit_tx(Address::ORACLE_RELAY, TxKind::PostPrice { sample }, now);
        }
        ledger.produce_block(now);
        let report = risk.cycle(now, &mut ledger, &oracle);
        for &i in &report.raised {
            let a = risk.alert(i);
            println!("t={s}s alert {:?} ({}), reference feed now {:?}", a.kind, a.subject, ledger.reference_feed());
        }
        for &i in &report.cleared {
            println!("t={s}s cleared {:?}, reference feed now {:?}", risk.alert(i).kind, ledger.reference_feed());
        }
        if ledger.trading_paused() != was_paused {
            was_paused = ledger.trading_paused();
            println!("t={s}s trading {}", if was_paused { "halted" } else { "resumed" });
        }
    }
}
