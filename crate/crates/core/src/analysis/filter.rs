use std::fmt;

use crate::engine::ActionKind;
use crate::logs::OfferRecord;
use crate::money::TickSize;

/// Asks above this many pence are treated as jokes or typos.
pub const OUTLIER_ASK_PENCE: u64 = 100_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FilterReport {
    /// Bids above value or asks below cost.
    pub irrational: usize,
    /// Asks above the outlier limit.
    pub outliers: usize,
}

impl FilterReport {
    pub fn removed(&self) -> usize {
        self.irrational + self.outliers
    }
}

impl fmt::Display for FilterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "removed {} (ir {}, outlier {})", self.removed(), self.irrational, self.outliers)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Removal {
    Irrational,
    Outlier,
}

fn removal(r: &OfferRecord, outlier_ticks: u64) -> Option<Removal> {
    let amount = r.amount?;
    match r.action {
        ActionKind::Bid if amount > r.trader_value => Some(Removal::Irrational),
        ActionKind::Ask if amount > outlier_ticks => Some(Removal::Outlier),
        ActionKind::Ask if amount < r.trader_value => Some(Removal::Irrational),
        _ => None,
    }
}

/// Drops individually irrational bids and asks and asks above £1,000.
/// Acceptances are kept. Applying the filter twice removes nothing more.
pub fn filter_offers(offers: &[OfferRecord], tick: TickSize) -> (Vec<OfferRecord>, FilterReport) {
    let outlier_ticks = OUTLIER_ASK_PENCE / tick.pence() as u64;
    let mut report = FilterReport::default();
    let kept = offers
        .iter()
        .filter(|r| match removal(r, outlier_ticks) {
            Some(Removal::Irrational) => {
                report.irrational += 1;
                false
            }
            Some(Removal::Outlier) => {
                report.outliers += 1;
                false
            }
            None => true,
        })
        .cloned()
        .collect();
    (kept, report)
}
