use crate::agents::{AgentPolicy, Observation};
use crate::engine::history::PublicHistory;
use crate::engine::market::{
    Action, ActionKind, MarketRules, MarketState, Mode, Outcome, OutcomeKind, Trade, TraderId,
};
use crate::error::EngineError;
use crate::money::Money;
use crate::rng::SimRng;
use crate::Side;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundConfig {
    pub rules: MarketRules,
    /// Queue mode: the round ends after this many trades.
    pub trades_per_round: Option<u32>,
    /// The round ends once every active trader has passed this many times
    /// since the last standing offer or trade. Zero disables the check.
    pub quiescence_passes: u32,
    /// Hard limit on decisions per round.
    pub offer_ceiling: u64,
}

impl Default for RoundConfig {
    fn default() -> Self {
        RoundConfig {
            rules: MarketRules::default(),
            trades_per_round: Some(4),
            quiescence_passes: 1,
            offer_ceiling: 1_000_000,
        }
    }
}

impl RoundConfig {
    pub fn dropout() -> Self {
        RoundConfig {
            rules: MarketRules {
                mode: Mode::Dropout,
                ..MarketRules::default()
            },
            trades_per_round: None,
            ..RoundConfig::default()
        }
    }

    /// Queue mode without recycling needs a queue at least as long as the
    /// trade quota on each side.
    pub fn check(&self, market: &MarketState) -> Result<(), EngineError> {
        if self.rules.mode == Mode::Queue && !self.rules.recycle {
            if let Some(quota) = self.trades_per_round {
                for side in [Side::Buyer, Side::Seller] {
                    let found = market.queue_len(side);
                    if found < quota as usize {
                        return Err(EngineError::QueueTooShort {
                            need: quota as usize,
                            found,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// One logged (non-pass) decision and the quotes it left behind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OfferEvent {
    pub round: u32,
    /// Index within the round, from 1.
    pub seq: u32,
    pub trader_id: TraderId,
    pub side: Side,
    pub trader_value: Money,
    pub action: ActionKind,
    /// Offered price, or the accepted quote for acceptances.
    pub amount: Option<Money>,
    pub outcome: OutcomeKind,
    pub market_bid_after: Option<Money>,
    pub market_ask_after: Option<Money>,
}

/// Sink for round events. Long streams use a tally instead of a full log.
pub trait Recorder {
    fn offer(&mut self, _event: &OfferEvent) {}
    fn trade(&mut self, _trade: &Trade) {}
}

impl Recorder for () {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundEnd {
    TradeQuota,
    Quiescent,
    /// One side has no active traders left.
    SideEmpty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundLog {
    pub round: u32,
    pub offers: Vec<OfferEvent>,
    pub trades: Vec<Trade>,
    pub passes: u64,
    /// Decisions drawn, passes included.
    pub steps: u64,
    pub end: RoundEnd,
    pub ir_warnings: u64,
}

#[derive(Default)]
struct Collector {
    offers: Vec<OfferEvent>,
    trades: Vec<Trade>,
}

impl Recorder for Collector {
    fn offer(&mut self, event: &OfferEvent) {
        self.offers.push(event.clone());
    }

    fn trade(&mut self, trade: &Trade) {
        self.trades.push(trade.clone());
    }
}

/// Draws one active trader uniformly at random, asks its policy and submits.
/// Returns the trader and the outcome.
pub fn step<R: Recorder + ?Sized>(
    market: &mut MarketState,
    policies: &[AgentPolicy],
    history: &mut PublicHistory,
    rng: &mut SimRng,
    logged: &mut u32,
    recorder: &mut R,
) -> Result<(TraderId, Outcome), EngineError> {
    let active = market.active();
    let id = active[rng.below(active.len() as u64) as usize];
    let trader = market.trader(id).ok_or(EngineError::UnknownTrader(id.0))?;
    let (side, value) = (trader.side, trader.value);
    let rules = market.rules();
    let obs = Observation {
        side,
        value,
        market_bid: market.market_bid(),
        market_ask: market.market_ask(),
        history,
        time: *logged as u64,
        improvement_rule: rules.improvement_rule,
        trade_on_cross: rules.trade_on_cross,
    };
    let policy = policies
        .get(id.0 as usize)
        .ok_or(EngineError::AgentCount(policies.len(), market.traders().len()))?;
    let action = policy.decide(&obs, rng)?;
    let amount = match action {
        Action::Bid(p) | Action::Ask(p) => Some(p),
        Action::AcceptAsk => market.market_ask(),
        Action::AcceptBid => market.market_bid(),
        Action::Pass => None,
    };
    let outcome = market.submit(id, action, history)?;
    if outcome != Outcome::Pass {
        *logged += 1;
        recorder.offer(&OfferEvent {
            round: market.round(),
            seq: *logged,
            trader_id: id,
            side,
            trader_value: value,
            action: action.kind(),
            amount,
            outcome: outcome.kind(),
            market_bid_after: market.market_bid(),
            market_ask_after: market.market_ask(),
        });
        if let Outcome::Trade(t) = &outcome {
            recorder.trade(t);
        }
    }
    Ok((id, outcome))
}

fn check_policies(market: &MarketState, policies: &[AgentPolicy]) -> Result<(), EngineError> {
    if policies.len() != market.traders().len() {
        return Err(EngineError::AgentCount(policies.len(), market.traders().len()));
    }
    for id in market.active() {
        let t = market.trader(*id).expect("active trader exists");
        policies[id.0 as usize].check_value(t.side, t.value)?;
    }
    Ok(())
}

/// Runs one round on a freshly started market. `policies` is indexed by
/// trader id. Queue mode stops at the trade quota, every mode stops on
/// quiescence or when a side runs out of traders.
pub fn run_round(
    market: &mut MarketState,
    policies: &[AgentPolicy],
    history: &mut PublicHistory,
    config: &RoundConfig,
    rng: &mut SimRng,
) -> Result<RoundLog, EngineError> {
    market.set_rules(config.rules);
    config.check(market)?;
    check_policies(market, policies)?;
    let warnings_before = market.ir_warnings();
    let mut sink = Collector::default();
    let mut passes_since_change = vec![0u32; market.traders().len()];
    let mut satisfied = 0usize;
    let (mut logged, mut steps, mut passes) = (0u32, 0u64, 0u64);
    let end = loop {
        if market.active_count(Side::Buyer) == 0 || market.active_count(Side::Seller) == 0 {
            break RoundEnd::SideEmpty;
        }
        if config.rules.mode == Mode::Queue
            && config.trades_per_round.is_some_and(|q| market.trades_this_round() >= q)
        {
            break RoundEnd::TradeQuota;
        }
        if config.quiescence_passes > 0 && satisfied >= market.active().len() {
            break RoundEnd::Quiescent;
        }
        if steps >= config.offer_ceiling {
            return Err(EngineError::OfferCeiling(config.offer_ceiling));
        }
        steps += 1;
        let (id, outcome) = step(market, policies, history, rng, &mut logged, &mut sink)?;
        match outcome {
            Outcome::Standing | Outcome::Trade(_) => {
                passes_since_change.fill(0);
                satisfied = 0;
            }
            Outcome::Pass | Outcome::Rejected(_) => {
                if outcome == Outcome::Pass {
                    passes += 1;
                }
                let n = &mut passes_since_change[id.0 as usize];
                *n += 1;
                if *n == config.quiescence_passes {
                    satisfied += 1;
                }
            }
        }
    };
    Ok(RoundLog {
        round: market.round(),
        offers: sink.offers,
        trades: sink.trades,
        passes,
        steps,
        end,
        ir_warnings: market.ir_warnings() - warnings_before,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StreamStats {
    pub steps: u64,
    pub offers: u64,
    pub trades: u64,
    pub price_sum: u128,
}

impl StreamStats {
    pub fn mean_price(&self) -> Option<f64> {
        (self.trades > 0).then(|| self.price_sum as f64 / self.trades as f64)
    }
}

struct Tally<'a, R: ?Sized> {
    stats: StreamStats,
    inner: &'a mut R,
}

impl<R: Recorder + ?Sized> Recorder for Tally<'_, R> {
    fn offer(&mut self, event: &OfferEvent) {
        self.stats.offers += 1;
        self.inner.offer(event);
    }

    fn trade(&mut self, trade: &Trade) {
        self.stats.trades += 1;
        self.stats.price_sum += trade.price.0 as u128;
        self.inner.trade(trade);
    }
}

/// Runs exactly `steps` decisions with no round boundary, passes included,
/// stopping early only if a side empties. Meant for long stationary runs
/// (queue mode with recycling).
pub fn run_stream<R: Recorder + ?Sized>(
    market: &mut MarketState,
    policies: &[AgentPolicy],
    history: &mut PublicHistory,
    rules: MarketRules,
    steps: u64,
    rng: &mut SimRng,
    recorder: &mut R,
) -> Result<StreamStats, EngineError> {
    market.set_rules(rules);
    check_policies(market, policies)?;
    let mut tally = Tally {
        stats: StreamStats::default(),
        inner: recorder,
    };
    let mut logged = 0u32;
    for _ in 0..steps {
        if market.active_count(Side::Buyer) == 0 || market.active_count(Side::Seller) == 0 {
            break;
        }
        tally.stats.steps += 1;
        step(market, policies, history, rng, &mut logged, &mut tally)?;
        if logged == u32::MAX {
            logged = 0;
        }
    }
    Ok(tally.stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::market::IrPolicy;
    use crate::money::TickSize;
    use crate::values::ValueProfile;

    fn symmetric() -> ValueProfile {
        ValueProfile::from_ticks(&[12, 32, 52, 72, 92], &[8, 28, 48, 68, 88], TickSize::POUND).unwrap()
    }

    fn zi_all(market: &MarketState) -> Vec<AgentPolicy> {
        vec![AgentPolicy::zi(Money(100)); market.traders().len()]
    }

    #[test]
    fn queue_round_has_exactly_the_quota() {
        let mut m = MarketState::new(&symmetric(), 4, MarketRules::default());
        let p = zi_all(&m);
        let mut h = PublicHistory::new(Money(100));
        let cfg = RoundConfig {
            quiescence_passes: 0,
            ..RoundConfig::default()
        };
        let log = run_round(&mut m, &p, &mut h, &cfg, &mut SimRng::new(5)).unwrap();
        assert_eq!(log.trades.len(), 4);
        assert_eq!(log.end, RoundEnd::TradeQuota);
    }

    #[test]
    fn short_queue_is_rejected() {
        let mut m = MarketState::new(&symmetric(), 2, MarketRules::default());
        let p = zi_all(&m);
        let mut h = PublicHistory::new(Money(100));
        let err = run_round(&mut m, &p, &mut h, &RoundConfig::default(), &mut SimRng::new(5));
        assert!(matches!(err, Err(EngineError::QueueTooShort { need: 4, found: 2 })));
    }

    #[test]
    fn idle_dropout_round_ends_without_trades() {
        let mut m = MarketState::new(&symmetric(), 0, RoundConfig::dropout().rules);
        let p = vec![AgentPolicy::Idle; m.traders().len()];
        let mut h = PublicHistory::new(Money(100));
        let log = run_round(&mut m, &p, &mut h, &RoundConfig::dropout(), &mut SimRng::new(1)).unwrap();
        assert!(log.trades.is_empty());
        assert!(log.offers.is_empty());
        assert_eq!(log.end, RoundEnd::Quiescent);
    }

    #[test]
    fn offer_ceiling_stops_a_livelock() {
        let mut m = MarketState::new(&symmetric(), 0, RoundConfig::dropout().rules);
        let p = vec![AgentPolicy::Idle; m.traders().len()];
        let mut h = PublicHistory::new(Money(100));
        let cfg = RoundConfig {
            quiescence_passes: 0,
            offer_ceiling: 1000,
            ..RoundConfig::dropout()
        };
        let err = run_round(&mut m, &p, &mut h, &cfg, &mut SimRng::new(1));
        assert!(matches!(err, Err(EngineError::OfferCeiling(1000))));
    }

    #[test]
    fn zi_rounds_replay_identically() {
        let run = || {
            let mut m = MarketState::new(&symmetric(), 4, MarketRules::default());
            let p = zi_all(&m);
            let mut h = PublicHistory::new(Money(100));
            run_round(&mut m, &p, &mut h, &RoundConfig::default(), &mut SimRng::new(77)).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn dropout_round_with_truthful_traders_exhausts_gains_from_trade() {
        let profile =
            ValueProfile::from_ticks(&[0, 0, 52, 52, 52], &[0, 0, 48, 52, 52], TickSize::POUND).unwrap();
        let mut cfg = RoundConfig::dropout();
        cfg.rules.enforce_ir = IrPolicy::Reject;
        for seed in 0..20 {
            let mut m = MarketState::new(&profile, 0, cfg.rules);
            let p = vec![AgentPolicy::reservation(0.0); m.traders().len()];
            let mut h = PublicHistory::new(Money(100));
            let log = run_round(&mut m, &p, &mut h, &cfg, &mut SimRng::new(seed)).unwrap();
            assert!(log.trades.iter().all(Trade::is_rational));
            assert_eq!(log.end, RoundEnd::Quiescent);
            let buyers = m.active_values(Side::Buyer);
            let sellers = m.active_values(Side::Seller);
            if let (Some(v), Some(c)) = (buyers.last(), sellers.first()) {
                assert!(v < c, "seed {seed}: buyer {v} and seller {c} left");
            }
        }
    }

    #[test]
    fn stream_counts_every_draw() {
        let rules = MarketRules {
            recycle: true,
            ..MarketRules::default()
        };
        let mut m = MarketState::new(&symmetric(), 4, rules);
        let p = zi_all(&m);
        let mut h = PublicHistory::new(Money(100));
        let s = run_stream(&mut m, &p, &mut h, rules, 10_000, &mut SimRng::new(3), &mut ()).unwrap();
        assert_eq!(s.steps, 10_000);
        assert!(s.trades > 500);
        assert_eq!(m.active_values(Side::Buyer).len(), 5);
    }
}
