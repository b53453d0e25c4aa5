//! Synthetic gold price process, the two price feeds that observe it, and the
//! oracle fault injectors.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::OracleError;
use crate::sim::{RngStream, SimTime};
use crate::units::{Ppm, Price};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedId {
    Primary,
    Secondary,
}

impl FeedId {
    pub fn other(self) -> FeedId {
        match self {
            FeedId::Primary => FeedId::Secondary,
            FeedId::Secondary => FeedId::Primary,
        }
    }
}

impl fmt::Display for FeedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeedId::Primary => "primary",
            FeedId::Secondary => "secondary",
        })
    }
}

impl FromStr for FeedId {
    type Err = OracleError;
    fn from_str(s: &str) -> Result<Self, OracleError> {
        match s {
            "primary" => Ok(FeedId::Primary),
            "secondary" => Ok(FeedId::Secondary),
            other => Err(OracleError::UnknownFeed(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceSample {
    pub feed: FeedId,
    pub price: Price,
    pub t: SimTime,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeedFault {
    Stuck { since: SimTime },
    Spoofed { offset_fraction: f64, since: SimTime },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedState {
    pub last: PriceSample,
    pub fault: Option<FeedFault>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub start_ms: u64,
    /// Per-second standard deviation of log returns.
    pub sigma: f64,
}

/// Named regime volatilities.
pub const STABLE_SIGMA: f64 = 5e-5;
pub const VOLATILE_SIGMA: f64 = 5e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceProcess {
    pub initial_price: f64,
    /// Per-second log drift.
    #[serde(default)]
    pub drift: f64,
    pub regimes: Vec<Regime>,
}

impl Default for PriceProcess {
    fn default() -> Self {
        PriceProcess { initial_price: 2400.0, drift: 0.0, regimes: vec![Regime { start_ms: 0, sigma: STABLE_SIGMA }] }
    }
}

impl PriceProcess {
    pub fn sigma_at(&self, now: SimTime) -> f64 {
        self.regimes
            .iter()
            .filter(|r| r.start_ms <= now.as_millis())
            .max_by_key(|r| r.start_ms)
            .map(|r| r.sigma)
            .unwrap_or(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionThresholds {
    pub staleness_ms: u64,
    pub divergence: f64,
}

impl Default for DetectionThresholds {
    fn default() -> Self {
        DetectionThresholds { staleness_ms: 10_000, divergence: 0.005 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Divergence {
    None,
    Stale,
    Diverged,
}

/// Stale takes precedence over Diverged.
pub fn detect_divergence(primary: &FeedState, secondary: &FeedState, now: SimTime, th: &DetectionThresholds) -> Divergence {
    if now.since(primary.last.t) >= th.staleness_ms {
        return Divergence::Stale;
    }
    // integer ratio test: |p - s| * 1e6 > threshold_ppm * s
    let p = primary.last.price.0 as u128;
    let s = secondary.last.price.0 as u128;
    let diff = p.abs_diff(s) * 1_000_000;
    if diff > Ppm::from_fraction(th.divergence).0 as u128 * s {
        Divergence::Diverged
    } else {
        Divergence::None
    }
}

/// True price path plus both feeds.
#[derive(Clone, Debug)]
pub struct Oracle {
    process: PriceProcess,
    log_price: f64,
    secondary_noise: f64,
    primary: FeedState,
    secondary: FeedState,
}

impl Oracle {
    pub fn new(process: PriceProcess, secondary_noise: f64, now: SimTime) -> Self {
        let p0 = Price::from_usd(process.initial_price);
        let feed = |feed| FeedState { last: PriceSample { feed, price: p0, t: now }, fault: None };
        Oracle {
            log_price: process.initial_price.ln(),
            process,
            secondary_noise,
            primary: feed(FeedId::Primary),
            secondary: feed(FeedId::Secondary),
        }
    }

    pub fn true_price(&self) -> f64 {
        self.log_price.exp()
    }

    pub fn feed(&self, id: FeedId) -> &FeedState {
        match id {
            FeedId::Primary => &self.primary,
            FeedId::Secondary => &self.secondary,
        }
    }

    fn feed_mut(&mut self, id: FeedId) -> &mut FeedState {
        match id {
            FeedId::Primary => &mut self.primary,
            FeedId::Secondary => &mut self.secondary,
        }
    }

    /// Advances the true price by one second: `log p += drift + sigma * z`.
    pub fn step_price(&mut self, now: SimTime, rng: &mut RngStream) -> f64 {
        let sigma = self.process.sigma_at(now);
        let z: f64 = rng.sample(StandardNormal);
        self.log_price += self.process.drift + sigma * z;
        self.true_price()
    }

    /// Publishes the current true price on every healthy feed.
    /// Returns the samples that were actually published.
    pub fn publish(&mut self, now: SimTime, noise_rng: &mut RngStream) -> Vec<PriceSample> {
        let truth = self.true_price();
        let z: f64 = noise_rng.sample(StandardNormal);
        let secondary_price = truth * (1.0 + self.secondary_noise * z);
        let mut out = Vec::with_capacity(2);
        for (id, price) in [(FeedId::Primary, truth), (FeedId::Secondary, secondary_price)] {
            if let Some(s) = self.observe(id, price, now) {
                out.push(s);
            }
        }
        out
    }

    fn observe(&mut self, id: FeedId, price: f64, now: SimTime) -> Option<PriceSample> {
        let state = self.feed_mut(id);
        let reported = match state.fault {
            Some(FeedFault::Stuck { .. }) => return None,
            Some(FeedFault::Spoofed { offset_fraction, .. }) => price * (1.0 + offset_fraction),
            None => price,
        };
        state.last = PriceSample { feed: id, price: Price::from_usd(reported), t: now };
        Some(state.last)
    }

    pub fn inject_fault(&mut self, id: FeedId, fault: FeedFault) {
        self.feed_mut(id).fault = Some(fault);
    }

    /// Clears any fault and immediately republishes the true price.
    pub fn restore(&mut self, id: FeedId, now: SimTime) -> PriceSample {
        self.feed_mut(id).fault = None;
        let truth = self.true_price();
        self.observe(id, truth, now).expect("healthy feed publishes")
    }

    pub fn detect(&self, now: SimTime, th: &DetectionThresholds) -> Divergence {
        detect_divergence(&self.primary, &self.secondary, now, th)
    }
}
