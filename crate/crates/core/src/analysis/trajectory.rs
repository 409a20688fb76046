use crate::engine::{ActionKind, OutcomeKind};
use crate::logs::OfferRecord;
use crate::money::Money;

/// Market bid and ask after one logged event; `seq` 0 is the round opening.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrajectoryPoint {
    pub seq: u32,
    pub bid: Money,
    pub ask: Money,
}

/// Rebuilds the engine's quotes from actions and outcomes alone: a standing
/// offer replaces its side's quote, a trade clears both, a rejection changes
/// nothing. Events must belong to one round, in order.
pub fn replay_quotes(events: &[&OfferRecord]) -> Vec<(Option<u64>, Option<u64>)> {
    let (mut bid, mut ask) = (None, None);
    events
        .iter()
        .map(|e| {
            match (e.outcome, e.action) {
                (OutcomeKind::Standing, ActionKind::Bid) => bid = e.amount,
                (OutcomeKind::Standing, ActionKind::Ask) => ask = e.amount,
                (OutcomeKind::Trade, _) => (bid, ask) = (None, None),
                _ => {}
            }
            (bid, ask)
        })
        .collect()
}

/// Plot-ready quotes for one round: no bid reads as 0, no ask as
/// `ask_ceiling`, asks above the ceiling are ignored, and a trade shows both
/// quotes at the trade price.
pub fn quote_trajectory(offers: &[OfferRecord], round: u32, ask_ceiling: Money) -> Vec<TrajectoryPoint> {
    let events: Vec<&OfferRecord> = offers.iter().filter(|r| r.round == round).collect();
    let mut out = vec![TrajectoryPoint {
        seq: 0,
        bid: Money::ZERO,
        ask: ask_ceiling,
    }];
    let (mut bid, mut ask): (Option<u64>, Option<u64>) = (None, None);
    for e in events {
        let point = match (e.outcome, e.action) {
            (OutcomeKind::Trade, _) => {
                // Trades happen at the standing quote on the other side.
                let price = match e.action {
                    ActionKind::Bid | ActionKind::AcceptAsk => ask.or(e.amount),
                    ActionKind::Ask | ActionKind::AcceptBid => bid.or(e.amount),
                    ActionKind::Pass => e.amount,
                }
                .unwrap_or(0);
                bid = None;
                ask = None;
                (Money(price), Money(price))
            }
            (o, a) => {
                if o == OutcomeKind::Standing {
                    match a {
                        ActionKind::Bid => bid = e.amount,
                        ActionKind::Ask => ask = e.amount,
                        _ => {}
                    }
                }
                let shown_ask = ask.filter(|a| *a <= ask_ceiling.0).unwrap_or(ask_ceiling.0);
                (Money(bid.unwrap_or(0)), Money(shown_ask))
            }
        };
        out.push(TrajectoryPoint {
            seq: e.seq,
            bid: point.0,
            ask: point.1,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Side;

    fn ev(seq: u32, side: Side, action: ActionKind, amount: u64, outcome: OutcomeKind) -> OfferRecord {
        OfferRecord {
            session: 1,
            treatment: "t".into(),
            round: 1,
            seq,
            trader_id: 0,
            side,
            trader_value: 50,
            action,
            amount: Some(amount),
            outcome,
            market_bid_after: None,
            market_ask_after: None,
        }
    }

    #[test]
    fn opening_and_offers() {
        let log = vec![
            ev(1, Side::Buyer, ActionKind::Bid, 30, OutcomeKind::Standing),
            ev(2, Side::Seller, ActionKind::Ask, 70, OutcomeKind::Standing),
            ev(3, Side::Buyer, ActionKind::AcceptAsk, 70, OutcomeKind::Trade),
        ];
        let t = quote_trajectory(&log, 1, Money(100));
        let pairs: Vec<(u64, u64)> = t.iter().map(|p| (p.bid.0, p.ask.0)).collect();
        assert_eq!(pairs, vec![(0, 100), (30, 100), (30, 70), (70, 70)]);
    }

    #[test]
    fn acceptance_at_fifty() {
        let log = vec![
            ev(1, Side::Seller, ActionKind::Ask, 50, OutcomeKind::Standing),
            ev(2, Side::Buyer, ActionKind::AcceptAsk, 50, OutcomeKind::Trade),
        ];
        let t = quote_trajectory(&log, 1, Money(100));
        assert_eq!((t[2].bid, t[2].ask), (Money(50), Money(50)));
    }

    #[test]
    fn asks_above_the_ceiling_are_ignored() {
        let log = vec![
            ev(1, Side::Seller, ActionKind::Ask, 1_000_000, OutcomeKind::Standing),
            ev(2, Side::Seller, ActionKind::Ask, 90, OutcomeKind::Standing),
        ];
        let t = quote_trajectory(&log, 1, Money(100));
        assert_eq!(t[1].ask, Money(100));
        assert_eq!(t[2].ask, Money(90));
    }

    #[test]
    fn crossing_bid_trades_at_the_standing_ask() {
        let log = vec![
            ev(1, Side::Seller, ActionKind::Ask, 40, OutcomeKind::Standing),
            ev(2, Side::Buyer, ActionKind::Bid, 45, OutcomeKind::Trade),
        ];
        let t = quote_trajectory(&log, 1, Money(100));
        assert_eq!((t[2].bid, t[2].ask), (Money(40), Money(40)));
    }
}
