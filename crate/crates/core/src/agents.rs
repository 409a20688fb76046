//! Automated trader policies.
//!
//! * ZI: budget-constrained uniform random offers.
//! * GD: one-shot expected-surplus maximisation against a belief built from
//!   public bid/ask history (taken and rejected counts).
//! * Reservation: a patience-weighted reservation price between own value
//!   and the mean traded price; accept at or better than it, otherwise creep
//!   the quote one tick.
//!
//! Every policy only ever returns actions that are legal for its side, and
//! passes when no legal improving move is worth making.

use std::cmp::Ordering;
use std::fmt;

use crate::engine::{Action, PublicHistory};
use crate::error::EngineError;
use crate::money::Money;
use crate::rng::SimRng;
use crate::Side;

/// What a trader can see when it is its turn.
#[derive(Clone, Copy, Debug)]
pub struct Observation<'a> {
    pub side: Side,
    pub value: Money,
    pub market_bid: Option<Money>,
    pub market_ask: Option<Money>,
    pub history: &'a PublicHistory,
    /// Offers so far in the current round.
    pub time: u64,
    pub improvement_rule: bool,
    pub trade_on_cross: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AgentPolicy {
    Zi { max_ask: Money },
    Gd { prior_weight: u64 },
    Reservation { patience: f64 },
    /// Always passes.
    Idle,
}

impl AgentPolicy {
    pub fn zi(max_ask: Money) -> Self {
        AgentPolicy::Zi { max_ask }
    }

    pub fn gd() -> Self {
        AgentPolicy::Gd { prior_weight: 1 }
    }

    pub fn reservation(patience: f64) -> Self {
        AgentPolicy::Reservation {
            patience: patience.clamp(0.0, 1.0),
        }
    }

    pub fn decide(&self, obs: &Observation<'_>, rng: &mut SimRng) -> Result<Action, EngineError> {
        match self {
            AgentPolicy::Zi { max_ask } => zi_decide(obs, *max_ask, rng),
            AgentPolicy::Gd { prior_weight } => Ok(gd_decide(obs, *prior_weight)),
            AgentPolicy::Reservation { patience } => Ok(reservation_decide(obs, *patience)),
            AgentPolicy::Idle => Ok(Action::Pass),
        }
    }

    /// Precondition check made once per market, before trading.
    pub fn check_value(&self, side: Side, value: Money) -> Result<(), EngineError> {
        match self {
            AgentPolicy::Zi { max_ask } if side == Side::Seller && value > *max_ask => {
                Err(EngineError::CostAboveMaxAsk {
                    cost: value,
                    max_ask: *max_ask,
                })
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for AgentPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentPolicy::Zi { max_ask } => write!(f, "zi(max_ask={max_ask})"),
            AgentPolicy::Gd { prior_weight } => write!(f, "gd(prior={prior_weight})"),
            AgentPolicy::Reservation { patience } => write!(f, "reservation(gamma={patience})"),
            AgentPolicy::Idle => f.write_str("idle"),
        }
    }
}

/// Zero-intelligence-constrained draw: buyers uniform on `0..=v`, sellers
/// uniform on `c..=max_ask`. A draw that cannot improve the standing quote is
/// a pass. With trading on cross disabled, a crossing draw becomes an
/// acceptance of the standing quote.
pub fn zi_decide(obs: &Observation<'_>, max_ask: Money, rng: &mut SimRng) -> Result<Action, EngineError> {
    match obs.side {
        Side::Buyer => {
            let b = Money(rng.inclusive(0, obs.value.0));
            if obs.improvement_rule && obs.market_bid.is_some_and(|q| b <= q) {
                return Ok(Action::Pass);
            }
            if !obs.trade_on_cross && obs.market_ask.is_some_and(|a| b >= a) {
                return Ok(Action::AcceptAsk);
            }
            Ok(Action::Bid(b))
        }
        Side::Seller => {
            if obs.value > max_ask {
                return Err(EngineError::CostAboveMaxAsk {
                    cost: obs.value,
                    max_ask,
                });
            }
            let a = Money(rng.inclusive(obs.value.0, max_ask.0));
            if obs.improvement_rule && obs.market_ask.is_some_and(|q| a >= q) {
                return Ok(Action::Pass);
            }
            if !obs.trade_on_cross && obs.market_bid.is_some_and(|b| a <= b) {
                return Ok(Action::AcceptBid);
            }
            Ok(Action::Ask(a))
        }
    }
}

/// Exact expected surplus `num / den` as integers.
#[derive(Clone, Copy, Debug)]
struct Payoff {
    num: u128,
    den: u128,
}

impl Payoff {
    fn certain(surplus: u64) -> Self {
        Payoff {
            num: surplus as u128,
            den: 1,
        }
    }

    fn is_zero(&self) -> bool {
        self.num == 0
    }

    fn cmp(&self, other: &Payoff) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// Belief that a buyer's bid `b` is accepted, `X / (X + Y)` with
///
/// ```text
/// X = M * (taken bids <= b + asks <= b) + w * b
/// Y = M * (rejected bids >= b)          + w * (M - b)
/// ```
///
/// where `M` is the grid maximum and `w` weights a uniform prior (`b / M`).
/// `X` grows and `Y` shrinks with `b`, so the belief is nondecreasing. Returns
/// `(X, X + Y)` for each grid price.
fn buyer_beliefs(history: &PublicHistory, prior: u64) -> Vec<(u128, u128)> {
    let m = history.grid_max().0 as u128;
    let n = history.grid_max().0 as usize + 1;
    let (made, taken, asks) = (history.bids_made(), history.bids_taken(), history.asks_made());
    let mut rejected_ge = vec![0u128; n + 1];
    for b in (0..n).rev() {
        rejected_ge[b] = rejected_ge[b + 1] + (made[b] - taken[b].min(made[b])) as u128;
    }
    let mut favourable = 0u128;
    let w = prior as u128;
    (0..n)
        .map(|b| {
            favourable += (taken[b] + asks[b]) as u128;
            let x = m * favourable + w * b as u128;
            let y = m * rejected_ge[b] + w * (m - b as u128);
            (x, x + y)
        })
        .collect()
}

/// Seller mirror: `X = M * (taken asks >= a + bids >= a) + w * (M - a)`,
/// `Y = M * (rejected asks <= a) + w * a`; nonincreasing in `a`.
fn seller_beliefs(history: &PublicHistory, prior: u64) -> Vec<(u128, u128)> {
    let m = history.grid_max().0 as u128;
    let n = history.grid_max().0 as usize + 1;
    let (made, taken, bids) = (history.asks_made(), history.asks_taken(), history.bids_made());
    let mut favourable_ge = vec![0u128; n + 1];
    for a in (0..n).rev() {
        favourable_ge[a] = favourable_ge[a + 1] + (taken[a] + bids[a]) as u128;
    }
    let mut rejected = 0u128;
    let w = prior as u128;
    (0..n)
        .map(|a| {
            rejected += (made[a] - taken[a].min(made[a])) as u128;
            let x = m * favourable_ge[a] + w * (m - a as u128);
            let y = m * rejected + w * a as u128;
            (x, x + y)
        })
        .collect()
}

/// Belief-based one-shot optimiser. Among legal non-crossing offers on the
/// grid it picks the smallest (buyers) or smallest (sellers, in ask terms)
/// maximiser of expected surplus; it accepts the standing quote instead when
/// the sure surplus is at least as large. Passes when nothing pays.
pub fn gd_decide(obs: &Observation<'_>, prior_weight: u64) -> Action {
    let grid_max = obs.history.grid_max();
    let prior = prior_weight.max(1);
    match obs.side {
        Side::Buyer => {
            let v = obs.value;
            let lo = match obs.market_bid {
                Some(b) if obs.improvement_rule => b.0 + 1,
                _ => 0,
            };
            let mut hi = v.0.min(grid_max.0);
            if let Some(a) = obs.market_ask {
                match a.0.checked_sub(1) {
                    Some(below) => hi = hi.min(below),
                    None => hi = 0,
                }
            }
            let cross_blocked = obs.market_ask == Some(Money::ZERO);
            let mut best: Option<(Money, Payoff)> = None;
            if lo <= hi && !cross_blocked {
                let beliefs = buyer_beliefs(obs.history, prior);
                for b in lo..=hi {
                    let (x, den) = beliefs[b as usize];
                    let p = Payoff {
                        num: (v.0 - b) as u128 * x,
                        den,
                    };
                    if best.is_none_or(|(_, q)| p.cmp(&q) == Ordering::Greater) {
                        best = Some((Money(b), p));
                    }
                }
            }
            let accept = obs
                .market_ask
                .filter(|a| *a <= v)
                .map(|a| Payoff::certain(v.0 - a.0));
            choose(best, accept, Action::Bid, Action::AcceptAsk)
        }
        Side::Seller => {
            let c = obs.value;
            let mut lo = c.0;
            if let Some(b) = obs.market_bid {
                lo = lo.max(b.0 + 1);
            }
            let hi = match obs.market_ask {
                Some(a) if obs.improvement_rule => a.0.checked_sub(1),
                _ => Some(grid_max.0),
            }
            .map(|h| h.min(grid_max.0));
            let mut best: Option<(Money, Payoff)> = None;
            if let Some(hi) = hi.filter(|h| lo <= *h) {
                let beliefs = seller_beliefs(obs.history, prior);
                for a in lo..=hi {
                    let (x, den) = beliefs[a as usize];
                    let p = Payoff {
                        num: (a - c.0) as u128 * x,
                        den,
                    };
                    if best.is_none_or(|(_, q)| p.cmp(&q) == Ordering::Greater) {
                        best = Some((Money(a), p));
                    }
                }
            }
            let accept = obs
                .market_bid
                .filter(|b| *b >= c)
                .map(|b| Payoff::certain(b.0 - c.0));
            choose(best, accept, Action::Ask, Action::AcceptBid)
        }
    }
}

fn choose(
    best: Option<(Money, Payoff)>,
    accept: Option<Payoff>,
    offer: fn(Money) -> Action,
    take: Action,
) -> Action {
    let offer_payoff = best.map(|(_, p)| p);
    match (accept, offer_payoff) {
        (Some(acc), Some(off)) if acc.cmp(&off) != Ordering::Less => {
            if acc.is_zero() {
                Action::Pass
            } else {
                take
            }
        }
        (Some(acc), None) if !acc.is_zero() => take,
        (_, Some(off)) if !off.is_zero() => offer(best.unwrap().0),
        _ => Action::Pass,
    }
}

/// Reservation price: `(1 - γ) v + γ p̂` capped at `v` for buyers, floored at
/// `c` for sellers, where `p̂` is the mean traded price so far (grid midpoint
/// before any trade). Rounded towards the trader's own interest.
pub fn reservation_price(side: Side, value: Money, patience: f64, history: &PublicHistory) -> Money {
    let estimate = history
        .mean_trade_price()
        .unwrap_or(history.grid_max().0 as f64 / 2.0);
    let r = (1.0 - patience) * value.0 as f64 + patience * estimate;
    match side {
        Side::Buyer => Money((r.floor().max(0.0) as u64).min(value.0)),
        Side::Seller => Money((r.ceil().max(0.0) as u64).max(value.0)),
    }
}

pub fn reservation_decide(obs: &Observation<'_>, patience: f64) -> Action {
    let r = reservation_price(obs.side, obs.value, patience, obs.history);
    match obs.side {
        Side::Buyer => {
            if obs.market_ask.is_some_and(|a| a <= r) {
                return Action::AcceptAsk;
            }
            let target = obs.market_bid.map_or(Money::ZERO, Money::up);
            if target <= r {
                Action::Bid(target)
            } else {
                Action::Pass
            }
        }
        Side::Seller => {
            if obs.market_bid.is_some_and(|b| b >= r) {
                return Action::AcceptBid;
            }
            let target = match obs.market_ask {
                Some(a) => a.down(),
                None => Some(obs.history.grid_max().max(r)),
            };
            match target {
                Some(t) if t >= r => Action::Ask(t),
                _ => Action::Pass,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs<'a>(side: Side, value: u64, history: &'a PublicHistory) -> Observation<'a> {
        Observation {
            side,
            value: Money(value),
            market_bid: None,
            market_ask: None,
            history,
            time: 0,
            improvement_rule: true,
            trade_on_cross: true,
        }
    }

    #[test]
    fn zi_buyer_with_zero_value_bids_zero() {
        let h = PublicHistory::new(Money(100));
        let mut rng = SimRng::new(1);
        for _ in 0..100 {
            assert_eq!(
                zi_decide(&obs(Side::Buyer, 0, &h), Money(100), &mut rng).unwrap(),
                Action::Bid(Money(0))
            );
        }
    }

    #[test]
    fn zi_seller_support() {
        let h = PublicHistory::new(Money(100));
        let mut rng = SimRng::new(2);
        let (mut lo, mut hi) = (u64::MAX, 0);
        for _ in 0..100_000 {
            let Action::Ask(a) = zi_decide(&obs(Side::Seller, 48, &h), Money(100), &mut rng).unwrap() else {
                panic!("seller must ask");
            };
            lo = lo.min(a.0);
            hi = hi.max(a.0);
        }
        assert_eq!((lo, hi), (48, 100));
    }

    #[test]
    fn zi_buyer_is_uniform() {
        // Chi-square goodness of fit over 53 cells, 52 degrees of freedom.
        let h = PublicHistory::new(Money(100));
        let mut rng = SimRng::new(3);
        let n = 100_000;
        let mut counts = [0u64; 53];
        for _ in 0..n {
            let Action::Bid(b) = zi_decide(&obs(Side::Buyer, 52, &h), Money(100), &mut rng).unwrap() else {
                panic!("buyer must bid");
            };
            counts[b.0 as usize] += 1;
        }
        let expected = n as f64 / 53.0;
        let chi2: f64 = counts
            .iter()
            .map(|c| (*c as f64 - expected).powi(2) / expected)
            .sum();
        // Upper 1% point of chi-square with 52 df is about 78.6.
        assert!(chi2 < 78.6, "chi2 = {chi2}");
    }

    #[test]
    fn zi_cost_above_max_ask_is_an_error() {
        let h = PublicHistory::new(Money(100));
        let mut rng = SimRng::new(1);
        assert!(zi_decide(&obs(Side::Seller, 120, &h), Money(100), &mut rng).is_err());
    }

    #[test]
    fn zi_passes_when_the_draw_cannot_improve() {
        let h = PublicHistory::new(Money(100));
        let mut rng = SimRng::new(1);
        let mut o = obs(Side::Buyer, 10, &h);
        o.market_bid = Some(Money(10));
        for _ in 0..50 {
            assert_eq!(zi_decide(&o, Money(100), &mut rng).unwrap(), Action::Pass);
        }
    }

    #[test]
    fn gd_empty_history_matches_closed_form() {
        let h = PublicHistory::new(Money(100));
        // argmax over b in 0..=52 of (52 - b) * b / 100.
        let oracle = (0..=52u64).max_by_key(|b| ((52 - b) * b, std::cmp::Reverse(*b))).unwrap();
        assert_eq!(gd_decide(&obs(Side::Buyer, 52, &h), 1), Action::Bid(Money(oracle)));
        assert_eq!(oracle, 26);
    }

    #[test]
    fn gd_zero_value_buyer_passes() {
        let h = PublicHistory::new(Money(100));
        let a = gd_decide(&obs(Side::Buyer, 0, &h), 1);
        assert!(matches!(a, Action::Pass | Action::Bid(Money(0))));
    }

    #[test]
    fn gd_accepts_a_cheap_ask() {
        let h = PublicHistory::new(Money(100));
        let mut o = obs(Side::Buyer, 52, &h);
        o.market_ask = Some(Money(20));
        assert_eq!(gd_decide(&o, 1), Action::AcceptAsk);
        o.market_ask = Some(Money(51));
        assert!(matches!(gd_decide(&o, 1), Action::Bid(_)));
    }

    #[test]
    fn gd_bid_falls_after_a_low_ask_is_taken() {
        let mut h = PublicHistory::new(Money(100));
        h.record_bid(Money(30));
        h.record_ask(Money(60));
        let before = gd_decide(&obs(Side::Buyer, 52, &h), 1);
        let mut h2 = h.clone();
        h2.record_ask(Money(10));
        h2.record_ask_taken(Money(10));
        let after = gd_decide(&obs(Side::Buyer, 52, &h2), 1);
        let (Action::Bid(x), Action::Bid(y)) = (before, after) else {
            panic!("expected bids");
        };
        assert!(y <= x, "{y} > {x}");
    }

    #[test]
    fn gd_beliefs_are_monotone() {
        let mut h = PublicHistory::new(Money(100));
        let mut rng = SimRng::new(8);
        for _ in 0..300 {
            let p = Money(rng.inclusive(0, 100));
            match rng.below(4) {
                0 => h.record_bid(p),
                1 => h.record_ask(p),
                2 => {
                    h.record_bid(p);
                    h.record_bid_taken(p)
                }
                _ => {
                    h.record_ask(p);
                    h.record_ask_taken(p)
                }
            }
        }
        let frac = |(x, d): (u128, u128)| x as f64 / d as f64;
        let b = buyer_beliefs(&h, 1);
        assert!(b.windows(2).all(|w| frac(w[0]) <= frac(w[1])));
        let s = seller_beliefs(&h, 1);
        assert!(s.windows(2).all(|w| frac(w[0]) >= frac(w[1])));
    }

    #[test]
    fn reservation_examples() {
        let h = PublicHistory::new(Money(100));
        let mut o = obs(Side::Buyer, 52, &h);
        o.market_ask = Some(Money(52));
        assert_eq!(reservation_decide(&o, 0.0), Action::AcceptAsk);

        let mut h37 = PublicHistory::new(Money(100));
        h37.record_ask_taken(Money(37));
        let mut o = obs(Side::Buyer, 52, &h37);
        o.market_ask = Some(Money(48));
        assert_eq!(reservation_price(Side::Buyer, Money(52), 1.0, &h37), Money(37));
        assert_ne!(reservation_decide(&o, 1.0), Action::AcceptAsk);
    }

    #[test]
    fn reservation_price_is_monotone_in_value() {
        let mut h = PublicHistory::new(Money(100));
        h.record_ask_taken(Money(41));
        for gamma in [0.0, 0.3, 0.7, 1.0] {
            let rs: Vec<Money> = (0..=100)
                .map(|v| reservation_price(Side::Buyer, Money(v), gamma, &h))
                .collect();
            assert!(rs.windows(2).all(|w| w[0] <= w[1]));
            for (v, r) in rs.iter().enumerate() {
                assert!(r.0 <= v as u64);
            }
        }
    }

    #[test]
    fn seller_policies_never_ask_below_cost() {
        let h = PublicHistory::new(Money(100));
        let mut rng = SimRng::new(4);
        for c in 0..=100u64 {
            for policy in [AgentPolicy::gd(), AgentPolicy::reservation(0.5), AgentPolicy::zi(Money(100))] {
                if let Action::Ask(a) = policy.decide(&obs(Side::Seller, c, &h), &mut rng).unwrap() {
                    assert!(a.0 >= c, "{policy} asked {a} below cost {c}");
                }
            }
        }
    }
}
