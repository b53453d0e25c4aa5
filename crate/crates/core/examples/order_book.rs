use ozsim::exchange::{Exchange, OrderKind, Side};
use ozsim::sim::SimTime;
use ozsim::units::{Address, Ppm, Price, TokenAmount};

fn main() {
    let mut ex = Exchange::new();
    let mm = Address::MM_HOT;
    for (i, bps) in [10.0, 30.0, 60.0].iter().enumerate() {
        let off = 2400.0 * bps / 10_000.0;
        let t = SimTime(i as u64);
        ex.place(mm, Side::Bid, OrderKind::Limit, Price::from_usd(2400.0 - off), TokenAmount::from_oz(20), t, false, true).unwrap();
        ex.place(mm, Side::Ask, OrderKind::Limit, Price::from_usd(2400.0 + off), TokenAmount::from_oz(20), t, false, true).unwrap();
    }
    let book = ex.book();
    let (bid, ask) = book.depth_within(0.01).unwrap();
    println!("mid {:.2} spread {:.4}% depth {}/{} oz", book.mid().unwrap(), book.spread_frac().unwrap() * 100.0, bid.as_oz(), ask.as_oz());

    // a market buy walks the ask ladder at maker prices
    let buyer = Address::user(1);
    let (_, res) = ex
        .place(buyer, Side::Bid, OrderKind::Market, Price(0), TokenAmount::from_oz(30), SimTime(10), false, true)
        .unwrap();
    for t in &res.trades {
        println!("fill {} oz @ {:.2}", t.qty.as_oz(), t.price.as_usd());
    }
    let seller = Address::user(2);
    ex.place(seller, Side::Ask, OrderKind::Market, Price(0), TokenAmount::from_oz(5), SimTime(11), false, true).unwrap();

    // trades between the same pair net to one transfer
    let (trades, transfers) = ex.take_settlement(Ppm(1_000));
    println!("{} trades settle as:", trades.len());
    for tr in transfers {
        println!("  {} -> {}: {} oz", tr.from, tr.to, tr.amount.as_oz());
    }

    match ex.place(buyer, Side::Bid, OrderKind::Market, Price(0), TokenAmount::from_oz(1), SimTime(12), true, true) {
        Err(e) => println!("while halted: {e}"),
        Ok(_) => unreachable!(),
    }
}
