//! Integer money on a fixed tick grid.
//!
//! Every amount in a market (values, costs, bids, asks, prices) is a count of
//! ticks. The tick size, in pence, is carried by the profile or log that owns
//! the amounts; two grids only meet at conversion points, where a mismatch is
//! reported as [`GridError`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::GridError;

/// A non-negative amount, counted in ticks.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Money(pub u64);

impl Money {
    pub const ZERO: Money = Money(0);

    #[inline]
    pub fn ticks(self) -> u64 {
        self.0
    }

    /// One tick higher.
    #[inline]
    pub fn up(self) -> Money {
        Money(self.0 + 1)
    }

    /// One tick lower, `None` at zero.
    #[inline]
    pub fn down(self) -> Option<Money> {
        self.0.checked_sub(1).map(Money)
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for Money {
    fn from(v: u64) -> Self {
        Money(v)
    }
}

/// Pence per tick. `TickSize::PENNY` is the default grid; the laboratory
/// treatments are quoted in whole pounds (`TickSize::POUND`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TickSize(u32);

impl TickSize {
    pub const PENNY: TickSize = TickSize(1);
    pub const POUND: TickSize = TickSize(100);

    pub fn new(pence: u32) -> Result<Self, GridError> {
        if pence == 0 {
            return Err(GridError::ZeroTick);
        }
        Ok(TickSize(pence))
    }

    pub fn pence(self) -> u32 {
        self.0
    }

    /// Whole ticks in an amount given in pence.
    pub fn from_pence(self, pence: u64) -> Result<Money, GridError> {
        if !pence.is_multiple_of(self.0 as u64) {
            return Err(GridError::OffGrid {
                pence,
                tick: self.0,
            });
        }
        Ok(Money(pence / self.0 as u64))
    }

    pub fn to_pence(self, amount: Money) -> u64 {
        amount.0 * self.0 as u64
    }

    /// Re-express `amount` on another grid; fails when it falls between ticks.
    pub fn convert(self, amount: Money, to: TickSize) -> Result<Money, GridError> {
        to.from_pence(self.to_pence(amount))
    }

    /// Currency value (pounds) of an amount.
    pub fn pounds(self, amount: Money) -> f64 {
        self.to_pence(amount) as f64 / 100.0
    }

    /// Ticks per pound, as a float, for converting tick-scale statistics.
    pub fn per_pound(self) -> f64 {
        100.0 / self.0 as f64
    }

    /// Parse a currency string such as `50`, `49.99` or `£1,000` into ticks.
    pub fn parse_amount(self, text: &str) -> Result<Money, GridError> {
        let pence = parse_pence(text)?;
        self.from_pence(pence)
    }
}

impl Default for TickSize {
    fn default() -> Self {
        TickSize::PENNY
    }
}

impl fmt::Display for TickSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for TickSize {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let pence: u32 = s
            .trim()
            .parse()
            .map_err(|_| GridError::Unparseable(s.to_string()))?;
        TickSize::new(pence)
    }
}

/// Pounds (optionally with up to two decimals) to pence.
fn parse_pence(text: &str) -> Result<u64, GridError> {
    let bad = || GridError::Unparseable(text.to_string());
    let cleaned: String = text
        .trim()
        .trim_start_matches('£')
        .chars()
        .filter(|c| *c != ',')
        .collect();
    let (whole, frac) = match cleaned.split_once('.') {
        Some((w, f)) => (w, f),
        None => (cleaned.as_str(), ""),
    };
    if whole.is_empty() || frac.len() > 2 {
        return Err(bad());
    }
    let whole: u64 = whole.parse().map_err(|_| bad())?;
    let frac: u64 = if frac.is_empty() {
        0
    } else {
        let f: u64 = frac.parse().map_err(|_| bad())?;
        if frac.len() == 1 {
            f * 10
        } else {
            f
        }
    };
    whole
        .checked_mul(100)
        .and_then(|w| w.checked_add(frac))
        .ok_or_else(bad)
}
