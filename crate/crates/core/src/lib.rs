//! Double-auction laboratory.
//!
//! Exact competitive-equilibrium sets for discrete value profiles and a
//! bisection solver for continuous economies, equilibrium-preserving value
//! shifts, an oral double-auction engine with queue and dropout modes,
//! automated trader policies, Marshallian-path checks and price statistics.
//!
//! Prices are integer tick counts ([`Money`]) on one grid per market.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub mod agents;
pub mod analysis;
pub mod batch;
pub mod config;
pub mod engine;
pub mod error;
pub mod logs;
pub mod marshallian;
pub mod money;
pub mod replicate;
pub mod rng;
pub mod shifts;
pub mod values;

pub use money::{Money, TickSize};
pub use rng::SimRng;
pub use values::{ce_set, CeResult, ValueProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Buyer,
    Seller,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Buyer => Side::Seller,
            Side::Seller => Side::Buyer,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Buyer => "buyer",
            Side::Seller => "seller",
        })
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "buyer" | "buyers" | "b" => Ok(Side::Buyer),
            "seller" | "sellers" | "s" => Ok(Side::Seller),
            other => Err(format!("unknown side `{other}`")),
        }
    }
}
