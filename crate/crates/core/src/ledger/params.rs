//! On-chain parameter store and the immutable bounds registry guarding it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::LedgerError;
use crate::units::{Ppm, TokenAmount};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKey {
    /// ppm
    BreakerSwingThreshold,
    /// ms
    BreakerWindow,
    /// ms
    BreakerCooldown,
    /// micro-OZ
    Epsilon,
    /// ppm
    FeeRate,
}

impl ParamKey {
    pub const ALL: [ParamKey; 5] = [
        ParamKey::BreakerSwingThreshold,
        ParamKey::BreakerWindow,
        ParamKey::BreakerCooldown,
        ParamKey::Epsilon,
        ParamKey::FeeRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamKey::BreakerSwingThreshold => "breaker_swing_threshold",
            ParamKey::BreakerWindow => "breaker_window",
            ParamKey::BreakerCooldown => "breaker_cooldown",
            ParamKey::Epsilon => "epsilon",
            ParamKey::FeeRate => "fee_rate",
        }
    }

    /// Converts a human-facing value (fraction, seconds, OZ) to the stored integer.
    pub fn encode(self, human: f64) -> u64 {
        match self {
            ParamKey::BreakerSwingThreshold | ParamKey::FeeRate => Ppm::from_fraction(human).0,
            ParamKey::BreakerWindow | ParamKey::BreakerCooldown => (human * 1000.0).round().max(0.0) as u64,
            ParamKey::Epsilon => TokenAmount::from_oz_f64(human).micro(),
        }
    }

    pub fn decode(self, raw: u64) -> f64 {
        match self {
            ParamKey::BreakerSwingThreshold | ParamKey::FeeRate => raw as f64 / 1e6,
            ParamKey::BreakerWindow | ParamKey::BreakerCooldown => raw as f64 / 1000.0,
            ParamKey::Epsilon => TokenAmount(raw).as_oz(),
        }
    }
}

impl fmt::Display for ParamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamKey {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        ParamKey::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown parameter {s}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Bound {
    Absolute { min: u64, max: u64 },
    /// Upper bound scales with the attested reserve; lower bound is zero.
    FractionOfReserve { max_ppm: u64 },
}

impl Bound {
    pub fn range(&self, attested_reserve: TokenAmount) -> (u64, u64) {
        match *self {
            Bound::Absolute { min, max } => (min, max),
            Bound::FractionOfReserve { max_ppm } => (0, attested_reserve.mul_ppm(Ppm(max_ppm)).micro()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsRegistry {
    bounds: BTreeMap<ParamKey, Bound>,
}

impl Default for BoundsRegistry {
    fn default() -> Self {
        let mut bounds = BTreeMap::new();
        bounds.insert(ParamKey::BreakerSwingThreshold, Bound::Absolute { min: 5_000, max: 100_000 });
        bounds.insert(ParamKey::BreakerWindow, Bound::Absolute { min: 60_000, max: 3_600_000 });
        bounds.insert(ParamKey::BreakerCooldown, Bound::Absolute { min: 60_000, max: 3_600_000 });
        bounds.insert(ParamKey::Epsilon, Bound::FractionOfReserve { max_ppm: 1_000 });
        bounds.insert(ParamKey::FeeRate, Bound::Absolute { min: 0, max: 10_000 });
        BoundsRegistry { bounds }
    }
}

impl BoundsRegistry {
    pub fn bound(&self, key: ParamKey) -> Bound {
        self.bounds[&key]
    }

    pub fn check(&self, key: ParamKey, value: u64, attested_reserve: TokenAmount) -> Result<(), LedgerError> {
        let (min, max) = self.bound(key).range(attested_reserve);
        if value < min || value > max {
            return Err(LedgerError::OutOfBounds { key: key.name().to_string(), value, min, max });
        }
        Ok(())
    }
}

/// Current on-chain parameter values. Every write goes through the registry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    values: BTreeMap<ParamKey, u64>,
    #[serde(skip)]
    registry: BoundsRegistry,
}

impl Default for ParamStore {
    fn default() -> Self {
        let mut values = BTreeMap::new();
        values.insert(ParamKey::BreakerSwingThreshold, 20_000);
        values.insert(ParamKey::BreakerWindow, 300_000);
        values.insert(ParamKey::BreakerCooldown, 300_000);
        values.insert(ParamKey::Epsilon, 0);
        values.insert(ParamKey::FeeRate, 0);
        ParamStore { values, registry: BoundsRegistry::default() }
    }
}

impl ParamStore {
    pub fn get(&self, key: ParamKey) -> u64 {
        self.values[&key]
    }

    pub fn swing_threshold(&self) -> Ppm {
        Ppm(self.get(ParamKey::BreakerSwingThreshold))
    }

    pub fn window_ms(&self) -> u64 {
        self.get(ParamKey::BreakerWindow)
    }

    pub fn cooldown_ms(&self) -> u64 {
        self.get(ParamKey::BreakerCooldown)
    }

    pub fn epsilon(&self) -> TokenAmount {
        TokenAmount(self.get(ParamKey::Epsilon))
    }

    pub fn fee_rate(&self) -> Ppm {
        Ppm(self.get(ParamKey::FeeRate))
    }

    pub fn registry(&self) -> &BoundsRegistry {
        &self.registry
    }

    pub fn set(&mut self, key: ParamKey, value: u64, attested_reserve: TokenAmount) -> Result<u64, LedgerError> {
        self.registry.check(key, value, attested_reserve)?;
        Ok(self.values.insert(key, value).unwrap_or_default())
    }

    /// Human-readable view for state dumps.
    pub fn to_human(&self) -> BTreeMap<String, f64> {
        self.values.iter().map(|(k, v)| (k.name().to_string(), k.decode(*v))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_lie_within_bounds() {
        let store = ParamStore::default();
        for key in ParamKey::ALL {
            store.registry().check(key, store.get(key), TokenAmount::from_oz(1000)).unwrap();
        }
    }

    #[test]
    fn epsilon_bound_tracks_reserve() {
        let mut store = ParamStore::default();
        let reserve = TokenAmount::from_oz(1000);
        assert!(store.set(ParamKey::Epsilon, TokenAmount::from_oz(1).micro(), reserve).is_ok());
        assert!(store.set(ParamKey::Epsilon, TokenAmount::from_oz_f64(1.000001).micro(), reserve).is_err());
    }

    #[test]
    fn out_of_bounds_write_leaves_value() {
        let mut store = ParamStore::default();
        let err = store.set(ParamKey::BreakerSwingThreshold, 150_000, TokenAmount::ZERO).unwrap_err();
        assert!(matches!(err, LedgerError::OutOfBounds { .. }));
        assert_eq!(store.get(ParamKey::BreakerSwingThreshold), 20_000);
    }

    #[test]
    fn encode_human_values() {
        assert_eq!(ParamKey::BreakerSwingThreshold.encode(0.03), 30_000);
        assert_eq!(ParamKey::BreakerCooldown.encode(300.0), 300_000);
        assert_eq!(ParamKey::Epsilon.encode(0.0001), 100);
        assert_eq!("fee_rate".parse::<ParamKey>().unwrap(), ParamKey::FeeRate);
    }
}
