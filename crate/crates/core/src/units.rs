//! Fixed-point quantities and addresses shared by every module.

use std::fmt;
use std::ops::{Add, AddAssign, Sub, SubAssign};

use serde::{Deserialize, Serialize};

pub const MICRO: u64 = 1_000_000;

/// Token or physical gold quantity in micro-ounces (1e-6 OZ).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenAmount(pub u64);

impl TokenAmount {
    pub const ZERO: TokenAmount = TokenAmount(0);

    pub const fn from_micro(v: u64) -> Self {
        TokenAmount(v)
    }

    pub const fn from_oz(oz: u64) -> Self {
        TokenAmount(oz * MICRO)
    }

    /// Rounds to the nearest micro-ounce. Negative input clamps to zero.
    pub fn from_oz_f64(oz: f64) -> Self {
        TokenAmount((oz * MICRO as f64).round().max(0.0) as u64)
    }

    pub const fn micro(self) -> u64 {
        self.0
    }

    pub fn as_oz(self) -> f64 {
        self.0 as f64 / MICRO as f64
    }

    pub fn checked_sub(self, rhs: TokenAmount) -> Option<TokenAmount> {
        self.0.checked_sub(rhs.0).map(TokenAmount)
    }

    pub fn saturating_sub(self, rhs: TokenAmount) -> TokenAmount {
        TokenAmount(self.0.saturating_sub(rhs.0))
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// `self * ppm / 1e6`, rounded half-up.
    pub fn mul_ppm(self, ppm: Ppm) -> TokenAmount {
        TokenAmount(((self.0 as u128 * ppm.0 as u128 + 500_000) / 1_000_000) as u64)
    }
}

impl Add for TokenAmount {
    type Output = TokenAmount;
    fn add(self, rhs: TokenAmount) -> TokenAmount {
        TokenAmount(self.0.checked_add(rhs.0).expect("token amount overflow"))
    }
}

impl AddAssign for TokenAmount {
    fn add_assign(&mut self, rhs: TokenAmount) {
        *self = *self + rhs;
    }
}

impl Sub for TokenAmount {
    type Output = TokenAmount;
    fn sub(self, rhs: TokenAmount) -> TokenAmount {
        TokenAmount(self.0.checked_sub(rhs.0).expect("token amount underflow"))
    }
}

impl SubAssign for TokenAmount {
    fn sub_assign(&mut self, rhs: TokenAmount) {
        *self = *self - rhs;
    }
}

impl std::iter::Sum for TokenAmount {
    fn sum<I: Iterator<Item = TokenAmount>>(iter: I) -> Self {
        iter.fold(TokenAmount::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for TokenAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:06} OZ", self.0 / MICRO, self.0 % MICRO)
    }
}

/// Price in micro-USD per OZ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Price(pub u64);

impl Price {
    pub fn from_usd(usd: f64) -> Self {
        Price((usd * MICRO as f64).round().max(1.0) as u64)
    }

    pub fn as_usd(self) -> f64 {
        self.0 as f64 / MICRO as f64
    }
}

impl fmt::Display for Price {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${:.6}", self.as_usd())
    }
}

/// Fraction in parts per million. Used for on-chain parameters so that
/// comparisons stay in integer arithmetic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ppm(pub u64);

impl Ppm {
    pub fn from_fraction(f: f64) -> Self {
        Ppm((f * 1e6).round().max(0.0) as u64)
    }

    pub fn as_fraction(self) -> f64 {
        self.0 as f64 / 1e6
    }
}

/// Account identifier. System accounts occupy the low range, users start at
/// [`Address::FIRST_USER`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Address(pub u64);

impl Address {
    pub const MM_HOT: Address = Address(1);
    pub const MM_COLD: Address = Address(2);
    pub const FEE_COLLECTOR: Address = Address(3);
    pub const ISSUANCE_AGENT: Address = Address(4);
    pub const RISK_AGENT: Address = Address(5);
    pub const ORACLE_RELAY: Address = Address(6);
    pub const EXCHANGE: Address = Address(7);
    pub const AUDITOR: Address = Address(10);
    pub const FIRST_SIGNER: u64 = 20;
    pub const FIRST_USER: u64 = 1000;

    pub fn user(index: u64) -> Address {
        Address(Self::FIRST_USER + index)
    }

    pub fn signer(index: u64) -> Address {
        Address(Self::FIRST_SIGNER + index)
    }

    pub fn is_user(self) -> bool {
        self.0 >= Self::FIRST_USER
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Address::MM_HOT => f.write_str("mm-hot"),
            Address::MM_COLD => f.write_str("mm-cold"),
            Address::FEE_COLLECTOR => f.write_str("fees"),
            Address::ISSUANCE_AGENT => f.write_str("issuance"),
            Address::RISK_AGENT => f.write_str("risk"),
            Address::ORACLE_RELAY => f.write_str("oracle"),
            Address::EXCHANGE => f.write_str("exchange"),
            Address::AUDITOR => f.write_str("auditor"),
            Address(n) if n >= Self::FIRST_USER => write!(f, "u{}", n - Self::FIRST_USER),
            Address(n) if n >= Self::FIRST_SIGNER => write!(f, "signer{}", n - Self::FIRST_SIGNER),
            Address(n) => write!(f, "sys{n}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oz_round_trip() {
        assert_eq!(TokenAmount::from_oz(5).micro(), 5_000_000);
        assert_eq!(TokenAmount::from_oz_f64(0.0001).micro(), 100);
        assert_eq!(TokenAmount::from_oz(1000).to_string(), "1000.000000 OZ");
    }

    #[test]
    fn ppm_scaling_rounds() {
        assert_eq!(TokenAmount::from_oz(1000).mul_ppm(Ppm(995_000)), TokenAmount::from_oz(995));
        assert_eq!(TokenAmount(3).mul_ppm(Ppm(500_000)), TokenAmount(2));
    }

    #[test]
    fn address_names() {
        assert_eq!(Address::user(7).to_string(), "u7");
        assert_eq!(Address::MM_HOT.to_string(), "mm-hot");
        assert!(Address::user(0).is_user());
        assert!(!Address::MM_COLD.is_user());
    }
}
