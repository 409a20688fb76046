//! Marshallian-path ordering and checks.
//!
//! Along a Marshallian path the highest-value remaining buyer trades with the
//! lowest-cost remaining seller, exactly the mutually beneficial pairs trade,
//! and every price is individually rational. The last of those pairs then
//! pins the final price into `[c_(T), v_(T)]`; in a continuous economy that
//! band shrinks to the equilibrium price.

use std::fmt;

use crate::engine::Trade;
use crate::error::{EconomyError, PathError};
use crate::money::Money;
use crate::rng::SimRng;
use crate::values::{ce_continuous, Bisection, ContinuousEconomy, PriceRange, ValueProfile};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarshallianOrder {
    /// `(buyer value, seller cost)` in trade order.
    pub pairs: Vec<(Money, Money)>,
    /// Number of leading pairs with `v >= c`.
    pub t: usize,
    /// `[c_(T), v_(T)]`, absent when nothing is worth trading.
    pub final_band: Option<PriceRange>,
}

pub fn marshallian_order(profile: &ValueProfile) -> MarshallianOrder {
    let mut buyers = profile.buyers().to_vec();
    let mut sellers = profile.sellers().to_vec();
    buyers.sort_unstable_by(|a, b| b.cmp(a));
    sellers.sort_unstable();
    let pairs: Vec<(Money, Money)> = buyers.into_iter().zip(sellers).collect();
    let t = pairs.iter().take_while(|(v, c)| v >= c).count();
    let final_band = t
        .checked_sub(1)
        .map(|i| PriceRange::new(pairs[i].1, pairs[i].0));
    MarshallianOrder {
        pairs,
        t,
        final_band,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathViolation {
    OutOfOrder {
        index: usize,
        expected: Option<(Money, Money)>,
        found: (Money, Money),
    },
    TradeCount {
        made: usize,
        beneficial: usize,
    },
    NotRational {
        index: usize,
        price: Money,
    },
    FinalPrice {
        price: Option<Money>,
        band: Option<PriceRange>,
    },
}

impl fmt::Display for PathViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathViolation::OutOfOrder {
                index,
                expected,
                found,
            } => match expected {
                Some((v, c)) => write!(
                    f,
                    "trade {index}: ({}, {}) where ({v}, {c}) was next",
                    found.0, found.1
                ),
                None => write!(f, "trade {index}: ({}, {}) beyond the order", found.0, found.1),
            },
            PathViolation::TradeCount { made, beneficial } => {
                write!(f, "{made} trades made, {beneficial} beneficial")
            }
            PathViolation::NotRational { index, price } => {
                write!(f, "trade {index}: price {price} outside [cost, value]")
            }
            PathViolation::FinalPrice { price, band } => match (price, band) {
                (Some(p), Some(b)) => write!(f, "final price {p} outside {b}"),
                (None, _) => f.write_str("no trades"),
                (Some(p), None) => write!(f, "final price {p} with no beneficial trade"),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathReport {
    pub order_conforms: bool,
    pub all_beneficial_traded: bool,
    pub prices_ir: bool,
    pub final_price_in_band: bool,
    pub violations: Vec<PathViolation>,
}

impl PathReport {
    pub fn is_marshallian(&self) -> bool {
        self.order_conforms && self.all_beneficial_traded && self.prices_ir
    }
}

/// Compares one round's trades with the profile's Marshallian order. Values
/// are compared rather than trader identities, so trades between equal-valued
/// traders conform in any order.
pub fn check_path(trades: &[Trade], profile: &ValueProfile) -> Result<PathReport, PathError> {
    for (index, t) in trades.iter().enumerate() {
        if !profile.buyers().contains(&t.buyer_value) {
            return Err(PathError::UnknownValue {
                index,
                side: "buyer",
                value: t.buyer_value,
            });
        }
        if !profile.sellers().contains(&t.seller_cost) {
            return Err(PathError::UnknownValue {
                index,
                side: "seller",
                value: t.seller_cost,
            });
        }
    }
    let order = marshallian_order(profile);
    let mut violations = Vec::new();

    let mut order_conforms = true;
    for (index, t) in trades.iter().enumerate() {
        let found = (t.buyer_value, t.seller_cost);
        let expected = order.pairs.get(index).copied();
        if expected != Some(found) {
            order_conforms = false;
            violations.push(PathViolation::OutOfOrder {
                index,
                expected,
                found,
            });
            break;
        }
    }

    let all_beneficial_traded = trades.len() == order.t;
    if !all_beneficial_traded {
        violations.push(PathViolation::TradeCount {
            made: trades.len(),
            beneficial: order.t,
        });
    }

    let mut prices_ir = true;
    for (index, t) in trades.iter().enumerate() {
        if !t.is_rational() {
            prices_ir = false;
            violations.push(PathViolation::NotRational {
                index,
                price: t.price,
            });
        }
    }

    let last = trades.last().map(|t| t.price);
    let final_price_in_band = matches!((last, order.final_band), (Some(p), Some(b)) if b.contains(p));
    if !final_price_in_band {
        violations.push(PathViolation::FinalPrice {
            price: last,
            band: order.final_band,
        });
    }

    Ok(PathReport {
        order_conforms,
        all_beneficial_traded,
        prices_ir,
        final_price_in_band,
        violations,
    })
}

/// Share of rounds whose trades follow the Marshallian order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conformance {
    pub flags: Vec<bool>,
}

impl Conformance {
    pub fn conforming(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }

    pub fn rounds(&self) -> usize {
        self.flags.len()
    }

    pub fn rate(&self) -> Option<f64> {
        (!self.flags.is_empty()).then(|| self.conforming() as f64 / self.flags.len() as f64)
    }
}

impl fmt::Display for Conformance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.conforming(), self.rounds())
    }
}

pub fn conformance_rate<'a, I>(rounds: I) -> Result<Conformance, PathError>
where
    I: IntoIterator<Item = (&'a [Trade], &'a ValueProfile)>,
{
    let flags = rounds
        .into_iter()
        .map(|(trades, profile)| check_path(trades, profile).map(|r| r.order_conforms))
        .collect::<Result<_, _>>()?;
    Ok(Conformance { flags })
}

/// Equilibrium price a Marshallian path must end at, or `None` when no buyer
/// values the good above any seller's cost.
pub fn final_price_continuous(economy: &ContinuousEconomy) -> Result<Option<f64>, EconomyError> {
    let top_buyer = economy.buyers().support().1;
    let bottom_seller = economy.sellers().support().0;
    if top_buyer <= bottom_seller {
        return Ok(None);
    }
    ce_continuous(economy, Bisection::default()).map(Some)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathSimulation {
    /// Trades executed out of `n` quantile pairs.
    pub trades: usize,
    pub last_price: Option<f64>,
    /// Largest quantile increment across the final step, on either side.
    pub step: f64,
}

/// Discretised continuous path with `n` unit masses: pair `k` trades the
/// buyer at `F^-1(1 - t_k)` with the seller at `G^-1(t_k)`, `t_k = (k - 1/2)/n`,
/// while the buyer's value is at least the seller's cost, at a price drawn
/// uniformly between the two.
pub fn simulate_path(economy: &ContinuousEconomy, n: usize, rng: &mut SimRng) -> PathSimulation {
    let buyer_at = |t: f64| economy.buyers().quantile(1.0 - t);
    let seller_at = |t: f64| economy.sellers().quantile(t);
    let t_of = |k: usize| (k as f64 - 0.5) / n as f64;
    let mut trades = 0;
    let mut last_price = None;
    for k in 1..=n {
        let (v, c) = (buyer_at(t_of(k)), seller_at(t_of(k)));
        if v < c {
            break;
        }
        trades = k;
        last_price = Some(rng.uniform(c, v));
    }
    let step = if trades == 0 {
        0.0
    } else {
        let (a, b) = (t_of(trades), t_of(trades + 1).min(1.0));
        (buyer_at(a) - buyer_at(b)).abs().max((seller_at(b) - seller_at(a)).abs())
    };
    PathSimulation {
        trades,
        last_price,
        step,
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::engine::TraderId;
    use crate::money::TickSize;
    use crate::values::{ce_set, PiecewiseLinearCdf};
    use proptest::prelude::*;

    fn pounds(b: &[u64], s: &[u64]) -> ValueProfile {
        ValueProfile::from_ticks(b, s, TickSize::POUND).unwrap()
    }

    fn low() -> ValueProfile {
        pounds(&[0, 0, 52, 52, 52], &[0, 0, 48, 52, 52])
    }

    fn trade(seq: u32, v: u64, c: u64, p: u64) -> Trade {
        Trade {
            round: 1,
            seq,
            buyer_id: TraderId(seq),
            seller_id: TraderId(100 + seq),
            buyer_value: Money(v),
            seller_cost: Money(c),
            price: Money(p),
            offers_before: 1,
        }
    }

    #[test]
    fn low_values_order() {
        let o = marshallian_order(&low());
        let m = |v, c| (Money(v), Money(c));
        assert_eq!(o.pairs, vec![m(52, 0), m(52, 0), m(52, 48), m(0, 52), m(0, 52)]);
        assert_eq!(o.t, 3);
        assert_eq!(o.final_band, Some(PriceRange::new(Money(48), Money(52))));
    }

    #[test]
    fn symmetric_order() {
        let o = marshallian_order(&pounds(&[12, 32, 52, 72, 92], &[8, 28, 48, 68, 88]));
        assert_eq!(o.t, 3);
        assert_eq!(o.final_band, Some(PriceRange::new(Money(48), Money(52))));
    }

    #[test]
    fn nothing_to_trade() {
        let o = marshallian_order(&pounds(&[10], &[20]));
        assert_eq!(o.t, 0);
        assert_eq!(o.final_band, None);
    }

    #[test]
    fn conforming_round() {
        let trades = [trade(1, 52, 0, 35), trade(2, 52, 0, 38), trade(3, 52, 48, 50)];
        let r = check_path(&trades, &low()).unwrap();
        assert!(r.order_conforms && r.all_beneficial_traded && r.prices_ir && r.final_price_in_band);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn out_of_order_round() {
        let trades = [trade(1, 52, 48, 50), trade(2, 52, 0, 35), trade(3, 52, 0, 38)];
        let r = check_path(&trades, &low()).unwrap();
        assert!(!r.order_conforms);
        assert!(r.all_beneficial_traded);
    }

    #[test]
    fn short_round() {
        let trades = [trade(1, 52, 0, 35), trade(2, 52, 0, 38)];
        let r = check_path(&trades, &low()).unwrap();
        assert!(r.order_conforms);
        assert!(!r.all_beneficial_traded);
        assert!(!r.final_price_in_band);
    }

    #[test]
    fn unknown_value_is_an_error() {
        let trades = [trade(1, 53, 0, 35)];
        assert!(check_path(&trades, &low()).is_err());
    }

    #[test]
    fn planted_fault_gives_17_of_18() {
        let good = vec![trade(1, 52, 0, 35), trade(2, 52, 0, 38), trade(3, 52, 48, 50)];
        let bad = vec![trade(1, 52, 48, 50), trade(2, 52, 0, 35), trade(3, 52, 0, 38)];
        let profile = low();
        let mut rounds: Vec<Vec<Trade>> = vec![good; 18];
        rounds[11] = bad;
        let c = conformance_rate(rounds.iter().map(|t| (t.as_slice(), &profile))).unwrap();
        assert_eq!((c.conforming(), c.rounds()), (17, 18));
        assert!(!c.flags[11]);
    }

    #[test]
    fn empty_log_has_no_rate() {
        let c = conformance_rate(std::iter::empty()).unwrap();
        assert_eq!(c.rate(), None);
    }

    #[test]
    fn uniform_economy_ends_at_fifty() {
        let u = Arc::new(PiecewiseLinearCdf::uniform(0.0, 100.0).unwrap());
        let e = ContinuousEconomy::new(u.clone(), u).unwrap();
        let p = final_price_continuous(&e).unwrap().unwrap();
        assert!((p - 50.0).abs() < 1e-4);
        let sim = simulate_path(&e, 10_000, &mut SimRng::new(1));
        assert!((sim.last_price.unwrap() - p).abs() <= 2.0 * sim.step);
        assert_eq!(sim.trades, 5_000);
    }

    #[test]
    fn disjoint_supports_have_no_final_price() {
        let b = Arc::new(PiecewiseLinearCdf::uniform(0.0, 40.0).unwrap());
        let s = Arc::new(PiecewiseLinearCdf::uniform(60.0, 100.0).unwrap());
        let e = ContinuousEconomy::new(b, s).unwrap();
        assert_eq!(final_price_continuous(&e).unwrap(), None);
        assert_eq!(simulate_path(&e, 1000, &mut SimRng::new(1)).trades, 0);
    }

    proptest! {
        #[test]
        fn beneficial_count_is_the_clearing_quantity(
            b in prop::collection::vec(0u64..60, 1..9),
            s in prop::collection::vec(0u64..60, 1..9),
        ) {
            let p = pounds(&b, &s);
            let o = marshallian_order(&p);
            let ce = ce_set(&p);
            prop_assert_eq!(o.t, ce.quantity);
            if let Some(band) = o.final_band {
                prop_assert!(band.lo <= ce.weak.hi && ce.weak.lo <= band.hi);
            }
        }
    }
}
