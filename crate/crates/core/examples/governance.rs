//! Token-weighted parameter change behind a timelock, a rejected
//! out-of-bounds value, and a 2-of-3 multisig unpause.

use ozsim::governance::{GovAction, GovernanceConfig, UpdatePayload};
use ozsim::ledger::{breaker_condition, Ledger, LedgerConfig, LedgerEvent, ParamKey, TripDecision, TxKind};
use ozsim::oracle::{FeedId, PriceSample};
use ozsim::sim::SimTime;
use ozsim::units::{Address, Price, TokenAmount};

fn step(ledger: &mut Ledger, sender: Address, action: GovAction, t_s: u64) {
    let now = SimTime(t_s * 1000);
    ledger.submit_tx(sender, TxKind::Governance { action }, now);
    for ev in ledger.produce_block(now).events {
        match ev {
            LedgerEvent::Governance { outcome, .. } => println!("t={t_s:>3}s {outcome:?}"),
            LedgerEvent::GovernanceFailed { reason, .. } => println!("t={t_s:>3}s failed: {reason}"),
            other => println!("t={t_s:>3}s {other:?}"),
        }
    }
}

fn swing_window(pct: f64) -> Vec<PriceSample> {
    [2400.0, 2400.0 * (1.0 + pct)]
        .iter()
        .enumerate()
        .map(|(i, p)| PriceSample { feed: FeedId::Primary, price: Price::from_usd(*p), t: SimTime(i as u64 * 1000) })
        .collect()
}

fn main() {
    let gov = GovernanceConfig { timelock_ms: 120_000, voting_period_ms: 60_000, ..GovernanceConfig::default() };
    let whale = Address::user(0);
    let mut ledger = Ledger::new(LedgerConfig::default(), gov)
        .with_genesis([(whale, TokenAmount::from_oz(600)), (Address::user(1), TokenAmount::from_oz(400))], TokenAmount::from_oz(1000));

    let probe = |l: &Ledger| breaker_condition(&swing_window(0.01), l.params().swing_threshold()) == TripDecision::Trip;
    println!("threshold {} ppm, 1% swing trips: {}", ledger.params().get(ParamKey::BreakerSwingThreshold), probe(&ledger));

    step(&mut ledger, whale, GovAction::ProposeParam { key: ParamKey::BreakerSwingThreshold, value: 5_000 }, 10);
    step(&mut ledger, whale, GovAction::Vote { proposal: 1, support: true }, 20);
    step(&mut ledger, whale, GovAction::Execute { proposal: 1 }, 30); // voting still open
    step(&mut ledger, whale, GovAction::Execute { proposal: 1 }, 200);
    println!("threshold {} ppm, 1% swing trips: {}", ledger.params().get(ParamKey::BreakerSwingThreshold), probe(&ledger));

    step(&mut ledger, whale, GovAction::ProposeParam { key: ParamKey::BreakerSwingThreshold, value: 500_000 }, 210);
    step(&mut ledger, whale, GovAction::Vote { proposal: 2, support: true }, 220);
    step(&mut ledger, whale, GovAction::Execute { proposal: 2 }, 400);

    ledger.trip_breaker(SimTime(405_000));
    println!("trading paused: {}", ledger.trading_paused());
    step(&mut ledger, Address::signer(0), GovAction::ProposeUpdate { payload: UpdatePayload::Unpause }, 410);
    step(&mut ledger, Address::signer(0), GovAction::SignUpdate { proposal: 3 }, 420);
    step(&mut ledger, Address::signer(0), GovAction::SignUpdate { proposal: 3 }, 430);
    step(&mut ledger, Address::signer(1), GovAction::SignUpdate { proposal: 3 }, 440);
    println!("trading paused: {}", ledger.trading_paused());
}
