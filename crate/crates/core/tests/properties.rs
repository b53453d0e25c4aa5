use std::collections::BTreeMap;

use proptest::prelude::*;

use ozsim::exchange::{settle_batch, Exchange, OrderKind, Side, Trade};
use ozsim::governance::GovernanceConfig;
use ozsim::ledger::{breaker_condition, Ledger, LedgerConfig, ParamKey, ParamStore, TripDecision};
use ozsim::oracle::{FeedId, PriceSample};
use ozsim::sim::SimTime;
use ozsim::units::{Address, Ppm, Price, TokenAmount};

#[derive(Clone, Debug)]
struct OrderSpec {
    owner: usize,
    bid: bool,
    market: bool,
    ticks: u64,
    qty: u64,
}

fn order_spec() -> impl Strategy<Value = OrderSpec> {
    (0..5usize, any::<bool>(), prop::bool::weighted(0.15), 1_990u64..2_010, 1u64..5_000_000)
        .prop_map(|(owner, bid, market, ticks, qty)| OrderSpec { owner, bid, market, ticks, qty })
}

fn price(ticks: u64) -> Price {
    Price(ticks * 1_000_000)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn book_conserves_quantity_and_never_crosses(orders in prop::collection::vec(order_spec(), 1..80)) {
        let mut ex = Exchange::new();
        let (mut placed_bid, mut placed_ask, mut dropped, mut cancelled) = (0u64, 0u64, 0u64, 0u64);
        let mut traded = 0u64;
        for (i, o) in orders.iter().enumerate() {
            let side = if o.bid { Side::Bid } else { Side::Ask };
            let kind = if o.market { OrderKind::Market } else { OrderKind::Limit };
            let (_, res) = ex
                .place(Address::user(o.owner as u64), side, kind, price(o.ticks), TokenAmount(o.qty), SimTime(i as u64), false, true)
                .unwrap();
            let filled: u64 = res.trades.iter().map(|t| t.qty.micro()).sum();
            traded += filled;
            cancelled += res.self_cancelled.iter().map(|c| c.qty.micro()).sum::<u64>();
            if o.market {
                dropped += o.qty - filled;
            }
            if o.bid { placed_bid += o.qty } else { placed_ask += o.qty }
            for t in &res.trades {
                // maker price, within the taker's limit
                if !o.market {
                    match side {
                        Side::Bid => prop_assert!(t.price <= price(o.ticks)),
                        Side::Ask => prop_assert!(t.price >= price(o.ticks)),
                    }
                }
            }
            // better prices first, then earlier makers
            for w in res.trades.windows(2) {
                match side {
                    Side::Bid => prop_assert!(w[0].price <= w[1].price),
                    Side::Ask => prop_assert!(w[0].price >= w[1].price),
                }
                if w[0].price == w[1].price {
                    prop_assert!(w[0].maker_order < w[1].maker_order);
                }
            }
            if let (Some(b), Some(a)) = (ex.book().best_bid(), ex.book().best_ask()) {
                prop_assert!(b < a);
            }
        }
        let rest_bid = ex.book().resting_qty(Side::Bid).micro();
        let rest_ask = ex.book().resting_qty(Side::Ask).micro();
        prop_assert_eq!(placed_bid + placed_ask, rest_bid + rest_ask + 2 * traded + dropped + cancelled);
    }

    #[test]
    fn settlement_preserves_net_positions(orders in prop::collection::vec(order_spec(), 1..60), fee in 0u64..10_000) {
        let mut ex = Exchange::new();
        for (i, o) in orders.iter().enumerate() {
            let side = if o.bid { Side::Bid } else { Side::Ask };
            let kind = if o.market { OrderKind::Market } else { OrderKind::Limit };
            let _ = ex.place(Address::user(o.owner as u64), side, kind, price(o.ticks), TokenAmount(o.qty), SimTime(i as u64), false, true);
        }
        let trades: Vec<Trade> = ex.unsettled().to_vec();
        let transfers = settle_batch(&trades, Ppm(fee));

        let mut expect: BTreeMap<Address, i128> = BTreeMap::new();
        for t in &trades {
            let (payer, payee) = t.token_flow();
            *expect.entry(payer).or_default() -= t.qty.micro() as i128;
            *expect.entry(payee).or_default() += t.qty.micro() as i128;
            let f = ((t.qty.micro() as u128 * fee as u128 + 500_000) / 1_000_000) as i128;
            *expect.entry(t.taker).or_default() -= f;
            *expect.entry(Address::FEE_COLLECTOR).or_default() += f;
        }
        let mut got: BTreeMap<Address, i128> = BTreeMap::new();
        let mut pairs = std::collections::BTreeSet::new();
        for tr in &transfers {
            prop_assert!(tr.from != tr.to);
            prop_assert!(!tr.amount.is_zero());
            prop_assert!(pairs.insert((tr.from.min(tr.to), tr.from.max(tr.to))), "one transfer per pair");
            *got.entry(tr.from).or_default() -= tr.amount.micro() as i128;
            *got.entry(tr.to).or_default() += tr.amount.micro() as i128;
        }
        expect.retain(|_, v| *v != 0);
        got.retain(|_, v| *v != 0);
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn transfers_conserve_supply(
        start in prop::collection::vec(0u64..1_000_000_000, 4),
        moves in prop::collection::vec((0..4u64, 0..4u64, 0u64..600_000_000), 1..50),
    ) {
        let alloc: Vec<_> = start.iter().enumerate().map(|(i, b)| (Address::user(i as u64), TokenAmount(*b))).collect();
        let total: u64 = start.iter().sum();
        let mut ledger = Ledger::new(LedgerConfig::default(), GovernanceConfig::default())
            .with_genesis(alloc, TokenAmount(total));
        for (from, to, amt) in moves {
            let (f, t) = (Address::user(from), Address::user(to));
            let before = ledger.balances().clone();
            let enough = ledger.balance(f).micro() >= amt;
            let receipt = ledger.execute_transfer(f, t, TokenAmount(amt));
            if !receipt.is_accepted() {
                prop_assert_eq!(&before, ledger.balances());
            } else {
                prop_assert!(enough);
            }
            prop_assert!(ledger.conservation_holds());
            prop_assert_eq!(ledger.total_supply().micro(), total);
        }
    }

    #[test]
    fn breaker_matches_swing_rule(
        prices in prop::collection::vec(1_000_000_000u64..3_000_000_000, 1..30),
        threshold in 5_000u64..100_000,
    ) {
        let window: Vec<PriceSample> = prices
            .iter()
            .enumerate()
            .map(|(i, p)| PriceSample { feed: FeedId::Primary, price: Price(*p), t: SimTime(i as u64 * 1000) })
            .collect();
        let now = *prices.last().unwrap() as u128;
        let trips = prices.iter().any(|&p| {
            let p = p as u128;
            now * 1_000_000 > p * (1_000_000 + threshold as u128) || now * 1_000_000 < p * (1_000_000 - threshold as u128)
        });
        let expected = if trips { TripDecision::Trip } else { TripDecision::NoTrip };
        prop_assert_eq!(breaker_condition(&window, Ppm(threshold)), expected);
    }

    #[test]
    fn param_updates_respect_bounds(key_i in 0..5usize, value in 0u64..5_000_000, reserve in 0u64..10_000_000_000) {
        let key = ParamKey::ALL[key_i];
        let (lo, hi) = match key {
            ParamKey::BreakerSwingThreshold => (5_000, 100_000),
            ParamKey::BreakerWindow | ParamKey::BreakerCooldown => (60_000, 3_600_000),
            ParamKey::Epsilon => (0, reserve / 1000),
            ParamKey::FeeRate => (0, 10_000),
        };
        let mut store = ParamStore::default();
        let old = store.get(key);
        let res = store.set(key, value, TokenAmount(reserve));
        if (lo..=hi).contains(&value) {
            prop_assert!(res.is_ok());
            prop_assert_eq!(store.get(key), value);
        } else {
            prop_assert!(res.is_err());
            prop_assert_eq!(store.get(key), old);
        }
    }
}
