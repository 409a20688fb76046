use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::engine::ActionKind;
use crate::logs::{OfferRecord, TradeRecord};
use crate::money::Money;
use crate::values::PriceRange;

/// Trade prices of one (session, treatment, half), in log order.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceSeries {
    pub session: u32,
    pub treatment: String,
    /// 1 or 2.
    pub half: u8,
    pub prices: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub session: u32,
    pub treatment: String,
    pub half: u8,
    pub rounds: usize,
    pub trades: usize,
    pub mean_price: Option<f64>,
    pub mean_bid: Option<f64>,
    pub mean_ask: Option<f64>,
    pub mean_price_change: Option<f64>,
    /// Share of trades priced inside the weak equilibrium interval.
    pub ce_hit_rate: Option<f64>,
}

type Key = (u32, String);

/// Maps each round of a (session, treatment) to half 1 or 2. The first half
/// holds the first `ceil(n / 2)` rounds.
fn halves(offers: &[OfferRecord], trades: &[TradeRecord]) -> BTreeMap<Key, BTreeMap<u32, u8>> {
    let mut rounds: BTreeMap<Key, BTreeSet<u32>> = BTreeMap::new();
    for (s, t, r) in offers
        .iter()
        .map(|o| (o.session, &o.treatment, o.round))
        .chain(trades.iter().map(|t| (t.session, &t.treatment, t.round)))
    {
        rounds.entry((s, t.clone())).or_default().insert(r);
    }
    rounds
        .into_iter()
        .map(|(k, set)| {
            let first = set.len().div_ceil(2);
            let map = set
                .into_iter()
                .enumerate()
                .map(|(i, r)| (r, if i < first { 1 } else { 2 }))
                .collect();
            (k, map)
        })
        .collect()
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn price_series(trades: &[TradeRecord]) -> Vec<PriceSeries> {
    let halves = halves(&[], trades);
    let mut out: BTreeMap<(u32, String, u8), Vec<f64>> = BTreeMap::new();
    for t in trades {
        let half = halves[&(t.session, t.treatment.clone())][&t.round];
        out.entry((t.session, t.treatment.clone(), half))
            .or_default()
            .push(t.price as f64);
    }
    out.into_iter()
        .map(|((session, treatment, half), prices)| PriceSeries {
            session,
            treatment,
            half,
            prices,
        })
        .collect()
}

/// Per (session, treatment, half) means and equilibrium hit rates. `weak_ce`
/// gives the weak interval for a treatment name, if known.
pub fn summarize<F>(offers: &[OfferRecord], trades: &[TradeRecord], weak_ce: F) -> Vec<SummaryRow>
where
    F: Fn(&str) -> Option<PriceRange>,
{
    let halves = halves(offers, trades);
    #[derive(Default)]
    struct Acc {
        rounds: BTreeSet<u32>,
        prices: Vec<f64>,
        bids: Vec<f64>,
        asks: Vec<f64>,
    }
    let mut acc: BTreeMap<(u32, String, u8), Acc> = BTreeMap::new();
    for o in offers {
        let half = halves[&(o.session, o.treatment.clone())][&o.round];
        let a = acc.entry((o.session, o.treatment.clone(), half)).or_default();
        a.rounds.insert(o.round);
        match (o.action, o.amount) {
            (ActionKind::Bid, Some(x)) => a.bids.push(x as f64),
            (ActionKind::Ask, Some(x)) => a.asks.push(x as f64),
            _ => {}
        }
    }
    for t in trades {
        let half = halves[&(t.session, t.treatment.clone())][&t.round];
        let a = acc.entry((t.session, t.treatment.clone(), half)).or_default();
        a.rounds.insert(t.round);
        a.prices.push(t.price as f64);
    }
    acc.into_iter()
        .map(|((session, treatment, half), a)| {
            let changes: Vec<f64> = a.prices.windows(2).map(|w| w[1] - w[0]).collect();
            let ce_hit_rate = weak_ce(&treatment).and_then(|band| {
                let hits = a
                    .prices
                    .iter()
                    .filter(|p| band.contains(Money(**p as u64)))
                    .count();
                (!a.prices.is_empty()).then(|| hits as f64 / a.prices.len() as f64)
            });
            SummaryRow {
                session,
                treatment,
                half,
                rounds: a.rounds.len(),
                trades: a.prices.len(),
                mean_price: mean(&a.prices),
                mean_bid: mean(&a.bids),
                mean_ask: mean(&a.asks),
                mean_price_change: mean(&changes),
                ce_hit_rate,
            }
        })
        .collect()
}
