//! Long zero-intelligence offer streams on a stationary market.
//!
//! Traders are drawn uniformly at random; every draw counts as one offer
//! whether or not it improves the market. Queue replenishment with recycling
//! keeps the value profile fixed for the whole stream.

use crate::agents::AgentPolicy;
use crate::engine::{
    run_stream, IrPolicy, MarketRules, MarketState, Mode, PublicHistory, StreamStats,
};
use crate::error::{EngineError, ProfileError};
use crate::money::TickSize;
use crate::rng::SimRng;
use crate::values::ValueProfile;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZiOptions {
    pub offers: u64,
    /// Price grid of the stream. The penny grid is close to continuous
    /// uniform draws.
    pub tick: TickSize,
    pub improvement_rule: bool,
    /// Maximum seller ask in pence.
    pub max_ask_pence: u64,
    pub seed: u64,
}

impl Default for ZiOptions {
    fn default() -> Self {
        ZiOptions {
            offers: 10_000_000,
            tick: TickSize::PENNY,
            improvement_rule: true,
            max_ask_pence: 10_000,
            seed: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZiReplication {
    pub offers: u64,
    pub trades: u64,
    /// Mean trade price in pounds.
    pub mean_price: Option<f64>,
    pub stats: StreamStats,
    pub tick: TickSize,
}

pub fn replicate_zi(profile: &ValueProfile, opts: &ZiOptions) -> Result<ZiReplication, EngineError> {
    let profile = profile.regrid(opts.tick).map_err(ProfileError::from)?;
    let max_ask = opts.tick.from_pence(opts.max_ask_pence).map_err(ProfileError::from)?;
    let rules = MarketRules {
        mode: Mode::Queue,
        improvement_rule: opts.improvement_rule,
        trade_on_cross: true,
        enforce_ir: IrPolicy::Reject,
        recycle: true,
    };
    let queue = profile.buyers().len().max(profile.sellers().len());
    let mut market = MarketState::new(&profile, queue, rules);
    let policies = vec![AgentPolicy::zi(max_ask); market.traders().len()];
    let mut history = PublicHistory::new(max_ask.max(profile.max_value()));
    let mut rng = SimRng::new(opts.seed);
    let stats = run_stream(&mut market, &policies, &mut history, rules, opts.offers, &mut rng, &mut ())?;
    Ok(ZiReplication {
        offers: stats.steps,
        trades: stats.trades,
        mean_price: stats
            .mean_price()
            .map(|p| p * opts.tick.pence() as f64 / 100.0),
        stats,
        tick: opts.tick,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric() -> ValueProfile {
        ValueProfile::from_ticks(&[12, 32, 52, 72, 92], &[8, 28, 48, 68, 88], TickSize::POUND).unwrap()
    }

    #[test]
    fn zero_offers_zero_trades() {
        let r = replicate_zi(&symmetric(), &ZiOptions { offers: 0, ..ZiOptions::default() }).unwrap();
        assert_eq!((r.offers, r.trades, r.mean_price), (0, 0, None));
    }

    #[test]
    fn short_symmetric_stream_centres_near_fifty() {
        let r = replicate_zi(&symmetric(), &ZiOptions { offers: 200_000, ..ZiOptions::default() }).unwrap();
        let m = r.mean_price.unwrap();
        assert!((m - 50.0).abs() < 1.5, "mean {m}");
        assert!(r.trades > 10_000);
    }

    #[test]
    fn pound_grid_is_supported() {
        let opts = ZiOptions {
            offers: 50_000,
            tick: TickSize::POUND,
            ..ZiOptions::default()
        };
        let r = replicate_zi(&symmetric(), &opts).unwrap();
        assert!(r.trades > 0);
    }

    #[test]
    fn reproducible() {
        let opts = ZiOptions { offers: 20_000, seed: 9, ..ZiOptions::default() };
        assert_eq!(replicate_zi(&symmetric(), &opts).unwrap(), replicate_zi(&symmetric(), &opts).unwrap());
    }
}
