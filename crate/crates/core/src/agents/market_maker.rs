//! Rule-based market maker: volatility-scaled ladder around the oracle price,
//! inventory skew, side suppression and cold-storage rebalancing.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::exchange::{Exchange, OrderKind, Side, Trade};
use crate::sim::SimTime;
use crate::units::{Address, Price, TokenAmount};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MMConfig {
    pub base_half_spread: f64,
    pub vol_coeff: f64,
    pub half_spread_cap: f64,
    pub level_offsets_bps: Vec<f64>,
    pub level_size_oz: f64,
    pub inv_limit_oz: f64,
    pub rebalance_threshold_oz: f64,
    pub skew_coeff: f64,
    pub vol_window_s: usize,
    /// `None` means unlimited reserve cash.
    pub cash_limit_usd: Option<f64>,
}

impl Default for MMConfig {
    fn default() -> Self {
        MMConfig {
            base_half_spread: 0.001,
            vol_coeff: 4.0,
            half_spread_cap: 0.005,
            level_offsets_bps: vec![10.0, 30.0, 60.0, 95.0],
            level_size_oz: 60.0,
            inv_limit_oz: 100.0,
            rebalance_threshold_oz: 50.0,
            skew_coeff: 0.001,
            vol_window_s: 60,
            cash_limit_usd: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", content = "amount", rename_all = "snake_case")]
pub enum RebalanceAction {
    ToCold(TokenAmount),
    FromCold(TokenAmount),
    /// Cash-funded purchase of newly issued tokens.
    Mint(TokenAmount),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuoteOutcome {
    pub sigma: f64,
    pub half_spread: f64,
    pub mid_q: f64,
    pub bid_suppressed: bool,
    pub ask_suppressed: bool,
    /// Fills if a posted level crossed resting orders.
    pub trades: Vec<Trade>,
}

/// `clamp(base + coeff * sigma, base, cap)`.
pub fn half_spread(cfg: &MMConfig, sigma: f64) -> f64 {
    (cfg.base_half_spread + cfg.vol_coeff * sigma).clamp(cfg.base_half_spread, cfg.half_spread_cap)
}

/// Sample standard deviation of successive log returns.
pub fn log_return_std(prices: &[f64]) -> f64 {
    if prices.len() < 3 {
        return 0.0;
    }
    let r: Vec<f64> = prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let n = r.len() as f64;
    let mean = r.iter().sum::<f64>() / n;
    (r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[derive(Debug)]
pub struct MarketMaker {
    config: MMConfig,
    prices: VecDeque<f64>,
    /// Net position relative to neutral, micro-OZ.
    inventory: i64,
    cash_usd: f64,
    last_half_spread: f64,
    rebalances: u64,
}

impl MarketMaker {
    pub fn new(config: MMConfig) -> Self {
        let h = config.base_half_spread;
        MarketMaker { config, prices: VecDeque::new(), inventory: 0, cash_usd: 0.0, last_half_spread: h, rebalances: 0 }
    }

    pub fn config(&self) -> &MMConfig {
        &self.config
    }

    pub fn inventory_oz(&self) -> f64 {
        self.inventory as f64 / 1e6
    }

    pub fn cash_usd(&self) -> f64 {
        self.cash_usd
    }

    pub fn last_half_spread(&self) -> f64 {
        self.last_half_spread
    }

    pub fn rebalances(&self) -> u64 {
        self.rebalances
    }

    /// Records the reference price; called once per second.
    pub fn observe_price(&mut self, price: f64) {
        self.prices.push_back(price);
        while self.prices.len() > self.config.vol_window_s + 1 {
            self.prices.pop_front();
        }
    }

    pub fn sigma(&mut self) -> f64 {
        log_return_std(self.prices.make_contiguous())
    }

    fn skewed_mid(&self, oracle: f64) -> f64 {
        oracle * (1.0 - self.config.skew_coeff * self.inventory_oz() / self.config.inv_limit_oz)
    }

    /// Cancels the previous ladder and posts a fresh one around the skewed mid.
    pub fn quote_cycle(&mut self, oracle: f64, now: SimTime, exchange: &mut Exchange) -> QuoteOutcome {
        exchange.book_mut().cancel_all(Address::MM_HOT);
        let sigma = self.sigma();
        let h = half_spread(&self.config, sigma);
        self.last_half_spread = h;
        let mid_q = self.skewed_mid(oracle);
        let inv = self.inventory_oz();
        let bid_suppressed = inv >= self.config.inv_limit_oz;
        let ask_suppressed = inv <= -self.config.inv_limit_oz;
        let size = TokenAmount::from_oz_f64(self.config.level_size_oz);
        let mut trades = Vec::new();
        for off in self.config.level_offsets_bps.clone() {
            let d = h.max(off / 1e4);
            for (side, suppressed, px) in
                [(Side::Bid, bid_suppressed, mid_q * (1.0 - d)), (Side::Ask, ask_suppressed, mid_q * (1.0 + d))]
            {
                if suppressed {
                    continue;
                }
                let placed =
                    exchange.place(Address::MM_HOT, side, OrderKind::Limit, Price::from_usd(px), size, now, false, true);
                if let Ok((_, r)) = placed {
                    trades.extend(r.trades);
                }
            }
        }
        for t in &trades {
            self.on_fill(t);
        }
        QuoteOutcome { sigma, half_spread: h, mid_q, bid_suppressed, ask_suppressed, trades }
    }

    /// Pulls every quote, e.g. during a breaker halt.
    pub fn withdraw_quotes(&mut self, exchange: &mut Exchange) -> usize {
        exchange.book_mut().cancel_all(Address::MM_HOT)
    }

    /// Updates inventory and cash for a trade in which the MM took part.
    pub fn on_fill(&mut self, t: &Trade) {
        let (payer, payee) = t.token_flow();
        let notional = t.qty.as_oz() * t.price.as_usd();
        if payee == Address::MM_HOT {
            self.inventory += t.qty.micro() as i64;
            self.cash_usd -= notional;
        } else if payer == Address::MM_HOT {
            self.inventory -= t.qty.micro() as i64;
            self.cash_usd += notional;
        }
    }

    /// Brings inventory back to neutral once it reaches the threshold.
    /// `cold_available` is what cold storage can return; `price` funds mints.
    pub fn rebalance(&mut self, cold_available: TokenAmount, price: f64) -> Option<RebalanceAction> {
        let threshold = TokenAmount::from_oz_f64(self.config.rebalance_threshold_oz).micro() as i64;
        if self.inventory.abs() < threshold {
            return None;
        }
        let amount = TokenAmount(self.inventory.unsigned_abs());
        let action = if self.inventory > 0 {
            RebalanceAction::ToCold(amount)
        } else if cold_available >= amount {
            RebalanceAction::FromCold(amount)
        } else {
            let cost = amount.as_oz() * price;
            if let Some(limit) = self.config.cash_limit_usd {
                if -(self.cash_usd - cost) > limit {
                    return None;
                }
            }
            self.cash_usd -= cost;
            RebalanceAction::Mint(amount)
        };
        self.inventory = 0;
        self.rebalances += 1;
        Some(action)
    }

    /// Reverses a rebalance that could not be carried out.
    pub fn rebalance_failed(&mut self, action: RebalanceAction, price: f64) {
        match action {
            RebalanceAction::ToCold(a) => self.inventory += a.micro() as i64,
            RebalanceAction::FromCold(a) => self.inventory -= a.micro() as i64,
            RebalanceAction::Mint(a) => {
                self.inventory -= a.micro() as i64;
                self.cash_usd += a.as_oz() * price;
            }
        }
    }
}
