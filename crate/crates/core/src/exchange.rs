//! Price-time priority limit order book, depth/spread measurement and netted
//! trade settlement.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::ExchangeError;
use crate::sim::SimTime;
use crate::units::{Address, Ppm, Price, TokenAmount};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderId(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Bid => Side::Ask,
            Side::Ask => Side::Bid,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderKind {
    Limit,
    Market,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub id: OrderId,
    pub owner: Address,
    pub side: Side,
    /// Ignored for market orders.
    pub price: Price,
    pub qty: TokenAmount,
    pub placed_at: SimTime,
    pub kind: OrderKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trade {
    pub maker_order: OrderId,
    pub taker_order: OrderId,
    pub maker: Address,
    pub taker: Address,
    pub taker_side: Side,
    pub price: Price,
    pub qty: TokenAmount,
    pub t: SimTime,
}

impl Trade {
    /// (OZ payer, OZ payee)
    pub fn token_flow(&self) -> (Address, Address) {
        match self.taker_side {
            Side::Bid => (self.maker, self.taker),
            Side::Ask => (self.taker, self.maker),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaceResult {
    pub trades: Vec<Trade>,
    pub resting: Option<OrderId>,
    /// The taker's own resting orders removed on contact.
    pub self_cancelled: Vec<Order>,
}

#[derive(Debug, Default, Clone)]
pub struct OrderBook {
    bids: BTreeMap<Price, VecDeque<Order>>,
    asks: BTreeMap<Price, VecDeque<Order>>,
    index: HashMap<OrderId, (Side, Price)>,
}

impl OrderBook {
    pub fn new() -> Self {
        Self::default()
    }

    fn side_mut(&mut self, side: Side) -> &mut BTreeMap<Price, VecDeque<Order>> {
        match side {
            Side::Bid => &mut self.bids,
            Side::Ask => &mut self.asks,
        }
    }

    pub fn best_bid(&self) -> Option<Price> {
        self.bids.keys().next_back().copied()
    }

    pub fn best_ask(&self) -> Option<Price> {
        self.asks.keys().next().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn resting_qty(&self, side: Side) -> TokenAmount {
        let levels = match side {
            Side::Bid => &self.bids,
            Side::Ask => &self.asks,
        };
        levels.values().flatten().map(|o| o.qty).sum()
    }

    /// Matches `order` against the opposite side at maker prices. Any
    /// remainder of a limit order rests; a market remainder is dropped.
    pub fn place(&mut self, mut order: Order) -> PlaceResult {
        let mut trades = Vec::new();
        let mut self_cancelled = Vec::new();
        let opposite = order.side.opposite();
        let crosses = |level: Price| match (order.kind, order.side) {
            (OrderKind::Market, _) => true,
            (OrderKind::Limit, Side::Bid) => level <= order.price,
            (OrderKind::Limit, Side::Ask) => level >= order.price,
        };
        let levels: Vec<Price> = match opposite {
            Side::Ask => self.asks.keys().copied().collect(),
            Side::Bid => self.bids.keys().rev().copied().collect(),
        };
        for level in levels {
            if order.qty.is_zero() || !crosses(level) {
                break;
            }
            let queue = self.side_mut(opposite).get_mut(&level).expect("level exists");
            let mut filled_ids = Vec::new();
            for maker in queue.iter_mut() {
                if order.qty.is_zero() {
                    break;
                }
                if maker.owner == order.owner {
                    self_cancelled.push(maker.clone());
                    maker.qty = TokenAmount::ZERO;
                    filled_ids.push(maker.id);
                    continue;
                }
                let qty = maker.qty.min(order.qty);
                maker.qty -= qty;
                order.qty -= qty;
                trades.push(Trade {
                    maker_order: maker.id,
                    taker_order: order.id,
                    maker: maker.owner,
                    taker: order.owner,
                    taker_side: order.side,
                    price: level,
                    qty,
                    t: order.placed_at,
                });
                if maker.qty.is_zero() {
                    filled_ids.push(maker.id);
                }
            }
            queue.retain(|o| !o.qty.is_zero());
            if queue.is_empty() {
                self.side_mut(opposite).remove(&level);
            }
            for id in filled_ids {
                self.index.remove(&id);
            }
        }
        let resting = if order.kind == OrderKind::Limit && !order.qty.is_zero() {
            let id = order.id;
            self.index.insert(id, (order.side, order.price));
            self.side_mut(order.side).entry(order.price).or_default().push_back(order);
            Some(id)
        } else {
            None
        };
        PlaceResult { trades, resting, self_cancelled }
    }

    pub fn cancel(&mut self, id: OrderId) -> Option<Order> {
        let (side, price) = self.index.remove(&id)?;
        let levels = self.side_mut(side);
        let queue = levels.get_mut(&price)?;
        let pos = queue.iter().position(|o| o.id == id)?;
        let order = queue.remove(pos);
        if queue.is_empty() {
            levels.remove(&price);
        }
        order
    }

    /// Cancels every resting order owned by `owner`.
    pub fn cancel_all(&mut self, owner: Address) -> usize {
        let ids: Vec<OrderId> = self
            .bids
            .values()
            .chain(self.asks.values())
            .flatten()
            .filter(|o| o.owner == owner)
            .map(|o| o.id)
            .collect();
        for id in &ids {
            self.cancel(*id);
        }
        ids.len()
    }

    /// `(best_bid + best_ask) / 2` in USD.
    pub fn mid(&self) -> Option<f64> {
        Some((self.best_bid()?.as_usd() + self.best_ask()?.as_usd()) / 2.0)
    }

    /// `(ask - bid) / mid`.
    pub fn spread_frac(&self) -> Option<f64> {
        let (b, a) = (self.best_bid()?.as_usd(), self.best_ask()?.as_usd());
        Some((a - b) / ((a + b) / 2.0))
    }

    /// Resting quantity priced within `pct` of mid, per side.
    pub fn depth_within(&self, pct: f64) -> Result<(TokenAmount, TokenAmount), ExchangeError> {
        let (Some(bb), Some(ba)) = (self.best_bid(), self.best_ask()) else {
            return Err(ExchangeError::EmptySide);
        };
        // compare |2p - (bb + ba)| <= pct * (bb + ba) in integers
        let twice_mid = bb.0 as u128 + ba.0 as u128;
        let limit = Ppm::from_fraction(pct).0 as u128 * twice_mid;
        let within = |p: &Price| (2 * p.0 as u128).abs_diff(twice_mid) * 1_000_000 <= limit;
        let sum = |levels: &BTreeMap<Price, VecDeque<Order>>| -> TokenAmount {
            levels.iter().filter(|(p, _)| within(p)).flat_map(|(_, q)| q.iter()).map(|o| o.qty).sum()
        };
        Ok((sum(&self.bids), sum(&self.asks)))
    }
}

/// One netted OZ transfer produced by settlement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub from: Address,
    pub to: Address,
    pub amount: TokenAmount,
}

/// Nets trades per counterparty pair; taker fees go to the fee collector.
pub fn settle_batch(trades: &[Trade], fee_rate: Ppm) -> Vec<Transfer> {
    // signed flow from the lower address to the higher one
    let mut net: BTreeMap<(Address, Address), i128> = BTreeMap::new();
    let mut add = |from: Address, to: Address, amount: TokenAmount| {
        if from == to || amount.is_zero() {
            return;
        }
        let (key, sign) = if from < to { ((from, to), 1) } else { ((to, from), -1) };
        *net.entry(key).or_default() += sign * amount.micro() as i128;
    };
    for t in trades {
        let (payer, payee) = t.token_flow();
        add(payer, payee, t.qty);
        if fee_rate.0 > 0 {
            add(t.taker, Address::FEE_COLLECTOR, t.qty.mul_ppm(fee_rate));
        }
    }
    net.into_iter()
        .filter(|(_, v)| *v != 0)
        .map(|((lo, hi), v)| {
            let amount = TokenAmount(v.unsigned_abs() as u64);
            if v > 0 {
                Transfer { from: lo, to: hi, amount }
            } else {
                Transfer { from: hi, to: lo, amount }
            }
        })
        .collect()
}

/// Order book plus admission checks and the unsettled-trade buffer.
#[derive(Debug, Default)]
pub struct Exchange {
    book: OrderBook,
    next_order: u64,
    unsettled: Vec<Trade>,
}

impl Exchange {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn book(&self) -> &OrderBook {
        &self.book
    }

    pub fn book_mut(&mut self) -> &mut OrderBook {
        &mut self.book
    }

    pub fn next_order_id(&mut self) -> OrderId {
        self.next_order += 1;
        OrderId(self.next_order)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn place(
        &mut self,
        owner: Address,
        side: Side,
        kind: OrderKind,
        price: Price,
        qty: TokenAmount,
        now: SimTime,
        halted: bool,
        onboarded: bool,
    ) -> Result<(OrderId, PlaceResult), ExchangeError> {
        if halted {
            return Err(ExchangeError::TradingHalted);
        }
        if !onboarded {
            return Err(ExchangeError::NotOnboarded(owner));
        }
        if qty.is_zero() {
            return Err(ExchangeError::ZeroQuantity);
        }
        if kind == OrderKind::Limit && price.0 == 0 {
            return Err(ExchangeError::ZeroPrice);
        }
        let id = self.next_order_id();
        let result = self.book.place(Order { id, owner, side, price, qty, placed_at: now, kind });
        self.unsettled.extend(result.trades.iter().cloned());
        Ok((id, result))
    }

    pub fn unsettled(&self) -> &[Trade] {
        &self.unsettled
    }

    /// Drains the unsettled buffer into netted transfers.
    pub fn take_settlement(&mut self, fee_rate: Ppm) -> (Vec<Trade>, Vec<Transfer>) {
        let trades = std::mem::take(&mut self.unsettled);
        let transfers = settle_batch(&trades, fee_rate);
        (trades, transfers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MM: Address = Address::MM_HOT;

    fn oz(n: u64) -> TokenAmount {
        TokenAmount::from_oz(n)
    }

    fn limit(ex: &mut Exchange, owner: Address, side: Side, usd: f64, qty: u64) -> OrderId {
        ex.place(owner, side, OrderKind::Limit, Price::from_usd(usd), oz(qty), SimTime::ZERO, false, true).unwrap().0
    }

    fn market(ex: &mut Exchange, owner: Address, side: Side, qty: u64) -> PlaceResult {
        ex.place(owner, side, OrderKind::Market, Price(0), oz(qty), SimTime::ZERO, false, true).unwrap().1
    }

    #[test]
    fn single_level_match() {
        let mut ex = Exchange::new();
        limit(&mut ex, MM, Side::Ask, 2401.0, 100);
        let r = market(&mut ex, Address::user(1), Side::Bid, 40);
        assert_eq!(r.trades.len(), 1);
        assert_eq!(r.trades[0].qty, oz(40));
        assert_eq!(r.trades[0].price, Price::from_usd(2401.0));
        assert_eq!(ex.book().resting_qty(Side::Ask), oz(60));
    }

    #[test]
    fn walks_price_levels() {
        let mut ex = Exchange::new();
        limit(&mut ex, MM, Side::Ask, 2402.0, 50);
        limit(&mut ex, MM, Side::Ask, 2401.0, 50);
        let r = market(&mut ex, Address::user(1), Side::Bid, 80);
        let fills: Vec<(f64, f64)> = r.trades.iter().map(|t| (t.price.as_usd(), t.qty.as_oz())).collect();
        assert_eq!(fills, vec![(2401.0, 50.0), (2402.0, 30.0)]);
    }

    #[test]
    fn fifo_within_level() {
        let mut ex = Exchange::new();
        let first = limit(&mut ex, Address::user(1), Side::Bid, 2400.0, 10);
        limit(&mut ex, Address::user(2), Side::Bid, 2400.0, 10);
        let r = market(&mut ex, Address::user(3), Side::Ask, 5);
        assert_eq!(r.trades[0].maker_order, first);
    }

    #[test]
    fn halted_and_unonboarded_are_rejected() {
        let mut ex = Exchange::new();
        limit(&mut ex, MM, Side::Ask, 2401.0, 10);
        let halted = ex.place(Address::user(1), Side::Bid, OrderKind::Market, Price(0), oz(1), SimTime::ZERO, true, true);
        assert_eq!(halted.unwrap_err(), ExchangeError::TradingHalted);
        let stranger = ex.place(Address::user(1), Side::Bid, OrderKind::Market, Price(0), oz(1), SimTime::ZERO, false, false);
        assert_eq!(stranger.unwrap_err(), ExchangeError::NotOnboarded(Address::user(1)));
        assert_eq!(ex.book().resting_qty(Side::Ask), oz(10));
    }

    #[test]
    fn self_match_cancels_resting() {
        let mut ex = Exchange::new();
        limit(&mut ex, Address::user(1), Side::Ask, 2401.0, 10);
        limit(&mut ex, Address::user(2), Side::Ask, 2401.0, 10);
        let r = market(&mut ex, Address::user(1), Side::Bid, 10);
        assert_eq!(r.trades.len(), 1);
        assert_eq!(r.trades[0].maker, Address::user(2));
        assert_eq!(r.self_cancelled.len(), 1);
        assert!(ex.book().is_empty());
    }

    #[test]
    fn own_limit_cannot_cross_the_book() {
        let mut ex = Exchange::new();
        limit(&mut ex, Address::user(1), Side::Ask, 2400.0, 1);
        let (_, r) = ex
            .place(Address::user(1), Side::Bid, OrderKind::Limit, Price::from_usd(2401.0), oz(1), SimTime::ZERO, false, true)
            .unwrap();
        assert!(r.trades.is_empty());
        assert_eq!(ex.book().best_ask(), None);
        assert_eq!(ex.book().best_bid(), Some(Price::from_usd(2401.0)));
    }

    #[test]
    fn limit_respects_price() {
        let mut ex = Exchange::new();
        limit(&mut ex, MM, Side::Ask, 2405.0, 10);
        let (_, r) = ex
            .place(Address::user(1), Side::Bid, OrderKind::Limit, Price::from_usd(2404.0), oz(5), SimTime::ZERO, false, true)
            .unwrap();
        assert!(r.trades.is_empty());
        assert!(r.resting.is_some());
        assert_eq!(ex.book().best_bid(), Some(Price::from_usd(2404.0)));
    }

    #[test]
    fn depth_ladder_examples() {
        let mut ex = Exchange::new();
        let mid = 2400.0;
        for bps in [10.0, 30.0, 60.0, 95.0] {
            limit(&mut ex, MM, Side::Ask, mid * (1.0 + bps / 1e4), 60);
            limit(&mut ex, MM, Side::Bid, mid * (1.0 - bps / 1e4), 60);
        }
        let (bid, ask) = ex.book().depth_within(0.01).unwrap();
        assert_eq!(ask, oz(240));
        assert_eq!(bid, oz(240));
        assert_eq!(ex.book().depth_within(0.0).unwrap(), (TokenAmount::ZERO, TokenAmount::ZERO));
        assert_eq!(OrderBook::new().depth_within(0.01), Err(ExchangeError::EmptySide));
    }

    #[test]
    fn netting_per_pair() {
        let mut ex = Exchange::new();
        limit(&mut ex, MM, Side::Ask, 2401.0, 100);
        limit(&mut ex, MM, Side::Bid, 2399.0, 100);
        let u = Address::user(1);
        market(&mut ex, u, Side::Bid, 10);
        market(&mut ex, u, Side::Bid, 5);
        market(&mut ex, u, Side::Ask, 3);
        let (trades, transfers) = ex.take_settlement(Ppm(0));
        assert_eq!(trades.len(), 3);
        assert_eq!(transfers, vec![Transfer { from: MM, to: u, amount: oz(12) }]);
        assert!(ex.take_settlement(Ppm(0)).1.is_empty());
    }

    #[test]
    fn cancel_all_clears_owner() {
        let mut ex = Exchange::new();
        limit(&mut ex, MM, Side::Ask, 2401.0, 1);
        limit(&mut ex, MM, Side::Bid, 2399.0, 1);
        limit(&mut ex, Address::user(1), Side::Bid, 2398.0, 1);
        assert_eq!(ex.book_mut().cancel_all(MM), 2);
        assert_eq!(ex.book().len(), 1);
    }
}
