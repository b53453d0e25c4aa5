//! Mints are capped by the attested reserve; blocks keep supply equal to the
//! sum of balances.

use ozsim::governance::GovernanceConfig;
use ozsim::ledger::{Ledger, LedgerConfig, TxKind};
use ozsim::sim::SimTime;
use ozsim::units::{Address, TokenAmount};

fn main() {
    let alice = Address::user(0);
    let mut ledger = Ledger::new(LedgerConfig::default(), GovernanceConfig::default())
        .with_genesis([(alice, TokenAmount::from_oz(90))], TokenAmount::from_oz(100));

    let mint = |oz| TxKind::Mint { recipient: alice, amount: TokenAmount::from_oz(oz), batch: "demo".into() };
    ledger.submit_tx(Address::ISSUANCE_AGENT, mint(8), SimTime(0));
    ledger.submit_tx(Address::ISSUANCE_AGENT, mint(5), SimTime(0)); // 98 + 5 > 100
    ledger.submit_tx(Address::AUDITOR, TxKind::SetReserve { amount: TokenAmount::from_oz(110) }, SimTime(0));
    ledger.submit_tx(Address::ISSUANCE_AGENT, mint(5), SimTime(0));

    let out = ledger.produce_block(SimTime(1000));
    for (tx, receipt) in &out.block.txs {
        println!("{:<12} {:?}", tx.kind.tag(), receipt);
    }
    for m in &out.block.accepted_mints {
        println!(
            "accepted mint: supply {} + {} <= reserve {} + eps {}",
            m.supply_before.as_oz(),
            m.amount.as_oz(),
            m.attested_reserve.as_oz(),
            m.epsilon.as_oz()
        );
    }
    println!(
        "supply {} oz, reserve {} oz, conservation {}",
        ledger.total_supply().as_oz(),
        ledger.attested_reserve().as_oz(),
        ledger.conservation_holds()
    );
}
