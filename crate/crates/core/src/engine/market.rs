//! Quote state and the improvement rule.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::history::PublicHistory;
use crate::error::EngineError;
use crate::money::Money;
use crate::values::ValueProfile;
use crate::Side;

#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TraderId(pub u32);

impl fmt::Display for TraderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Active,
    Inactive,
    Queued,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraderState {
    pub id: TraderId,
    pub side: Side,
    /// Valuation (buyers) or cost (sellers). Queued traders acquire theirs on entry.
    pub value: Money,
    pub status: Status,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Bid(Money),
    Ask(Money),
    AcceptAsk,
    AcceptBid,
    Pass,
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Bid(_) => ActionKind::Bid,
            Action::Ask(_) => ActionKind::Ask,
            Action::AcceptAsk => ActionKind::AcceptAsk,
            Action::AcceptBid => ActionKind::AcceptBid,
            Action::Pass => ActionKind::Pass,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Bid,
    Ask,
    AcceptAsk,
    AcceptBid,
    Pass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// Bid not above the market bid, or ask not below the market ask.
    NotImproving,
    /// Bid above value, ask below cost, or an acceptance at a loss.
    NotRational,
    /// Offer crosses the opposite quote while trading on cross is off.
    Crosses,
}

/// How individually irrational offers are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum IrPolicy {
    Reject,
    /// Allow and count.
    #[default]
    Warn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Quote {
    pub price: Money,
    pub trader: TraderId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trade {
    pub round: u32,
    /// Index of the trade within its round, from 1.
    pub seq: u32,
    pub buyer_id: TraderId,
    pub seller_id: TraderId,
    pub buyer_value: Money,
    pub seller_cost: Money,
    pub price: Money,
    /// Offers logged since the previous trade of the round (or its start).
    pub offers_before: u32,
}

impl Trade {
    pub fn is_rational(&self) -> bool {
        self.seller_cost <= self.price && self.price <= self.buyer_value
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The offer now stands as the market bid or ask.
    Standing,
    Trade(Trade),
    Rejected(RejectReason),
    Pass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Standing,
    Trade,
    Rejected,
    Pass,
}

impl Outcome {
    pub fn kind(&self) -> OutcomeKind {
        match self {
            Outcome::Standing => OutcomeKind::Standing,
            Outcome::Trade(_) => OutcomeKind::Trade,
            Outcome::Rejected(_) => OutcomeKind::Rejected,
            Outcome::Pass => OutcomeKind::Pass,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Departed traders are replaced from a queue with the same value.
    Queue,
    /// Departed traders leave for the rest of the round.
    Dropout,
}

/// Trading rules shared by `submit` and the round loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MarketRules {
    pub mode: Mode,
    pub improvement_rule: bool,
    pub trade_on_cross: bool,
    pub enforce_ir: IrPolicy,
    /// Queue mode: departed traders rejoin the back of the queue instead of
    /// sitting out. Keeps a long offer stream stationary.
    pub recycle: bool,
}

impl Default for MarketRules {
    fn default() -> Self {
        MarketRules {
            mode: Mode::Queue,
            improvement_rule: true,
            trade_on_cross: true,
            enforce_ir: IrPolicy::Warn,
            recycle: false,
        }
    }
}

/// Seating plan: which traders start active and which wait in the queue.
#[derive(Clone, Debug)]
pub struct MarketState {
    traders: Vec<TraderState>,
    active: Vec<TraderId>,
    queue_buyers: VecDeque<TraderId>,
    queue_sellers: VecDeque<TraderId>,
    /// Seats in id order; `seat_values` assigns initial values per round.
    active_buyer_seats: Vec<TraderId>,
    active_seller_seats: Vec<TraderId>,
    queued_buyer_seats: Vec<TraderId>,
    queued_seller_seats: Vec<TraderId>,
    bid: Option<Quote>,
    ask: Option<Quote>,
    rules: MarketRules,
    round: u32,
    trades_this_round: u32,
    offers_since_trade: u32,
    ir_warnings: u64,
}

impl MarketState {
    /// Buyers get ids `0..nb+q`, then sellers; the first `nb` (`ns`) of each
    /// side start active with the profile values in order, the remaining `q`
    /// wait in the queue.
    pub fn new(profile: &ValueProfile, queue_per_side: usize, rules: MarketRules) -> Self {
        let nb = profile.buyers().len();
        let ns = profile.sellers().len();
        let mut traders = Vec::with_capacity(nb + ns + 2 * queue_per_side);
        let mut push = |side, value, status| {
            let id = TraderId(traders.len() as u32);
            traders.push(TraderState {
                id,
                side,
                value,
                status,
            });
            id
        };
        let active_buyer_seats: Vec<_> = profile
            .buyers()
            .iter()
            .map(|v| push(Side::Buyer, *v, Status::Active))
            .collect();
        let queued_buyer_seats: Vec<_> = (0..queue_per_side)
            .map(|_| push(Side::Buyer, Money::ZERO, Status::Queued))
            .collect();
        let active_seller_seats: Vec<_> = profile
            .sellers()
            .iter()
            .map(|c| push(Side::Seller, *c, Status::Active))
            .collect();
        let queued_seller_seats: Vec<_> = (0..queue_per_side)
            .map(|_| push(Side::Seller, Money::ZERO, Status::Queued))
            .collect();
        let mut state = MarketState {
            traders,
            active: Vec::new(),
            queue_buyers: VecDeque::new(),
            queue_sellers: VecDeque::new(),
            active_buyer_seats,
            active_seller_seats,
            queued_buyer_seats,
            queued_seller_seats,
            bid: None,
            ask: None,
            rules,
            round: 0,
            trades_this_round: 0,
            offers_since_trade: 0,
            ir_warnings: 0,
        };
        let buyers = profile.buyers().to_vec();
        let sellers = profile.sellers().to_vec();
        state.start_round(1, &buyers, &sellers);
        state
    }

    /// Reseats everyone for a new round: active seats take `buyer_values` /
    /// `seller_costs` in seat order, the queue refills, quotes clear.
    pub fn start_round(&mut self, round: u32, buyer_values: &[Money], seller_costs: &[Money]) {
        assert_eq!(buyer_values.len(), self.active_buyer_seats.len());
        assert_eq!(seller_costs.len(), self.active_seller_seats.len());
        self.active.clear();
        for (id, v) in self.active_buyer_seats.iter().zip(buyer_values) {
            let t = &mut self.traders[id.0 as usize];
            t.value = *v;
            t.status = Status::Active;
            self.active.push(*id);
        }
        for (id, c) in self.active_seller_seats.iter().zip(seller_costs) {
            let t = &mut self.traders[id.0 as usize];
            t.value = *c;
            t.status = Status::Active;
            self.active.push(*id);
        }
        let queued = |traders: &mut Vec<TraderState>, seats: &[TraderId]| {
            seats
                .iter()
                .map(|id| {
                    let t = &mut traders[id.0 as usize];
                    t.status = Status::Queued;
                    t.value = Money::ZERO;
                    *id
                })
                .collect::<VecDeque<_>>()
        };
        self.queue_buyers = queued(&mut self.traders, &self.queued_buyer_seats);
        self.queue_sellers = queued(&mut self.traders, &self.queued_seller_seats);
        self.bid = None;
        self.ask = None;
        self.round = round;
        self.trades_this_round = 0;
        self.offers_since_trade = 0;
    }

    pub fn rules(&self) -> MarketRules {
        self.rules
    }

    pub fn set_rules(&mut self, rules: MarketRules) {
        self.rules = rules;
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn market_bid(&self) -> Option<Money> {
        self.bid.map(|q| q.price)
    }

    pub fn market_ask(&self) -> Option<Money> {
        self.ask.map(|q| q.price)
    }

    pub fn bid_quote(&self) -> Option<Quote> {
        self.bid
    }

    pub fn ask_quote(&self) -> Option<Quote> {
        self.ask
    }

    pub fn trader(&self, id: TraderId) -> Option<&TraderState> {
        self.traders.get(id.0 as usize)
    }

    pub fn traders(&self) -> &[TraderState] {
        &self.traders
    }

    /// Active traders in selection order.
    pub fn active(&self) -> &[TraderId] {
        &self.active
    }

    pub fn active_count(&self, side: Side) -> usize {
        self.active
            .iter()
            .filter(|id| self.traders[id.0 as usize].side == side)
            .count()
    }

    /// Values of active traders on one side, sorted.
    pub fn active_values(&self, side: Side) -> Vec<Money> {
        let mut v: Vec<Money> = self
            .active
            .iter()
            .map(|id| &self.traders[id.0 as usize])
            .filter(|t| t.side == side)
            .map(|t| t.value)
            .collect();
        v.sort_unstable();
        v
    }

    pub fn queue_len(&self, side: Side) -> usize {
        match side {
            Side::Buyer => self.queue_buyers.len(),
            Side::Seller => self.queue_sellers.len(),
        }
    }

    pub fn trades_this_round(&self) -> u32 {
        self.trades_this_round
    }

    pub fn ir_warnings(&self) -> u64 {
        self.ir_warnings
    }

    fn active_trader(&self, id: TraderId) -> Result<&TraderState, EngineError> {
        let t = self
            .traders
            .get(id.0 as usize)
            .ok_or(EngineError::UnknownTrader(id.0))?;
        if t.status != Status::Active {
            return Err(EngineError::InactiveTrader(id.0));
        }
        Ok(t)
    }

    /// Applies one action. Trades are settled before returning, so quotes are
    /// always clear after a trade. Accepted offers and trades are added to
    /// `history`.
    pub fn submit(
        &mut self,
        id: TraderId,
        action: Action,
        history: &mut PublicHistory,
    ) -> Result<Outcome, EngineError> {
        let trader = self.active_trader(id)?;
        let (side, value) = (trader.side, trader.value);
        let legal = matches!(
            (side, action),
            (_, Action::Pass)
                | (Side::Buyer, Action::Bid(_) | Action::AcceptAsk)
                | (Side::Seller, Action::Ask(_) | Action::AcceptBid)
        );
        if !legal {
            let what = match action {
                Action::Bid(_) => "bid",
                Action::Ask(_) => "ask",
                Action::AcceptAsk => "accept an ask",
                Action::AcceptBid => "accept a bid",
                Action::Pass => "pass",
            };
            return Err(EngineError::WrongSide {
                trader: id.0,
                action: what,
            });
        }
        let reject_ir = self.rules.enforce_ir == IrPolicy::Reject;
        let outcome = match action {
            Action::Pass => return Ok(Outcome::Pass),
            Action::Bid(b) => {
                if b > value && reject_ir {
                    Outcome::Rejected(RejectReason::NotRational)
                } else if self.rules.improvement_rule && self.bid.is_some_and(|q| b <= q.price) {
                    Outcome::Rejected(RejectReason::NotImproving)
                } else if let Some(ask) = self.ask.filter(|q| b >= q.price) {
                    if self.rules.trade_on_cross {
                        self.warn_if(b > value);
                        history.record_ask_taken(ask.price);
                        Outcome::Trade(self.execute(id, ask.trader, ask.price))
                    } else {
                        Outcome::Rejected(RejectReason::Crosses)
                    }
                } else {
                    self.warn_if(b > value);
                    history.record_bid(b);
                    self.bid = Some(Quote { price: b, trader: id });
                    Outcome::Standing
                }
            }
            Action::Ask(a) => {
                if a < value && reject_ir {
                    Outcome::Rejected(RejectReason::NotRational)
                } else if self.rules.improvement_rule && self.ask.is_some_and(|q| a >= q.price) {
                    Outcome::Rejected(RejectReason::NotImproving)
                } else if let Some(bid) = self.bid.filter(|q| a <= q.price) {
                    if self.rules.trade_on_cross {
                        self.warn_if(a < value);
                        history.record_bid_taken(bid.price);
                        Outcome::Trade(self.execute(bid.trader, id, bid.price))
                    } else {
                        Outcome::Rejected(RejectReason::Crosses)
                    }
                } else {
                    self.warn_if(a < value);
                    history.record_ask(a);
                    self.ask = Some(Quote { price: a, trader: id });
                    Outcome::Standing
                }
            }
            Action::AcceptAsk => {
                let ask = self.ask.ok_or(EngineError::NoStandingQuote("ask"))?;
                if ask.price > value && reject_ir {
                    Outcome::Rejected(RejectReason::NotRational)
                } else {
                    self.warn_if(ask.price > value);
                    history.record_ask_taken(ask.price);
                    Outcome::Trade(self.execute(id, ask.trader, ask.price))
                }
            }
            Action::AcceptBid => {
                let bid = self.bid.ok_or(EngineError::NoStandingQuote("bid"))?;
                if bid.price < value && reject_ir {
                    Outcome::Rejected(RejectReason::NotRational)
                } else {
                    self.warn_if(bid.price < value);
                    history.record_bid_taken(bid.price);
                    Outcome::Trade(self.execute(bid.trader, id, bid.price))
                }
            }
        };
        if !matches!(outcome, Outcome::Trade(_)) {
            self.offers_since_trade += 1;
        }
        Ok(outcome)
    }

    fn warn_if(&mut self, irrational: bool) {
        if irrational {
            self.ir_warnings += 1;
        }
    }

    fn execute(&mut self, buyer: TraderId, seller: TraderId, price: Money) -> Trade {
        self.trades_this_round += 1;
        let trade = Trade {
            round: self.round,
            seq: self.trades_this_round,
            buyer_id: buyer,
            seller_id: seller,
            buyer_value: self.traders[buyer.0 as usize].value,
            seller_cost: self.traders[seller.0 as usize].value,
            price,
            offers_before: self.offers_since_trade + 1,
        };
        self.settle_trade(&trade);
        trade
    }

    /// Clears both quotes and retires the two counterparties. In queue mode
    /// the head of each queue takes the departed trader's seat and value.
    pub fn settle_trade(&mut self, trade: &Trade) {
        self.bid = None;
        self.ask = None;
        self.offers_since_trade = 0;
        for id in [trade.buyer_id, trade.seller_id] {
            self.depart(id);
        }
    }

    fn depart(&mut self, id: TraderId) {
        let Some(pos) = self.active.iter().position(|a| *a == id) else {
            return;
        };
        let (side, value) = {
            let t = &self.traders[id.0 as usize];
            (t.side, t.value)
        };
        let queue = match side {
            Side::Buyer => &mut self.queue_buyers,
            Side::Seller => &mut self.queue_sellers,
        };
        let replacement = match self.rules.mode {
            Mode::Queue => queue.pop_front(),
            Mode::Dropout => None,
        };
        match replacement {
            Some(next) => {
                if self.rules.recycle {
                    queue.push_back(id);
                    self.traders[id.0 as usize].status = Status::Queued;
                } else {
                    self.traders[id.0 as usize].status = Status::Inactive;
                }
                let t = &mut self.traders[next.0 as usize];
                t.value = value;
                t.status = Status::Active;
                self.active[pos] = next;
            }
            None => {
                self.traders[id.0 as usize].status = Status::Inactive;
                self.active.remove(pos);
            }
        }
    }
}
