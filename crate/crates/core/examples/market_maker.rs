//! Quotes through a calm and a volatile stretch, absorbs one-sided flow and
//! asks for rebalances once inventory drifts.

use ozsim::agents::{MMConfig, MarketMaker};
use ozsim::exchange::{Exchange, OrderKind, Side};
use ozsim::oracle::{Oracle, PriceProcess, Regime};
use ozsim::sim::{RngStream, SimTime};
use ozsim::units::{Address, Price, TokenAmount};

fn main() {
    let process = PriceProcess {
        initial_price: 2400.0,
        drift: 0.0,
        regimes: vec![Regime { start_ms: 0, sigma: 5e-5 }, Regime { start_ms: 300_000, sigma: 5e-4 }],
    };
    let mut oracle = Oracle::new(process, 0.0, SimTime::ZERO);
    let mut rng = RngStream::new(3, "price");
    let mut ex = Exchange::new();
    let mut mm = MarketMaker::new(MMConfig::default());
    let taker = Address::user(7);

    for s in 1..=600u64 {
        let now = SimTime(s * 1000);
        let px = oracle.step_price(now, &mut rng);
        mm.observe_price(px);
        let q = mm.quote_cycle(px, now, &mut ex);
        // steady buying pressure drains the maker's inventory
        if s % 5 == 0 {
            let (_, res) = ex.place(taker, Side::Bid, OrderKind::Market, Price(0), TokenAmount::from_oz(4), now, false, true).unwrap();
            for t in &res.trades {
                mm.on_fill(t);
            }
        }
        let inv = mm.inventory_oz();
        if let Some(action) = mm.rebalance(TokenAmount::from_oz(500), px) {
            println!("t={s:>3}s inventory {inv:>7.2} oz -> {action:?}");
        }
        if s % 100 == 0 {
            println!(
                "t={s:>3}s px {px:.2} sigma {:.2e} half-spread {:.3}% book spread {:.3}%",
                q.sigma,
                q.half_spread * 100.0,
                ex.book().spread_frac().unwrap_or(f64::NAN) * 100.0
            );
        }
    }
    println!("inventory {:.2} oz, cash {:.0} usd, {} rebalances", mm.inventory_oz(), mm.cash_usd(), mm.rebalances());
}
