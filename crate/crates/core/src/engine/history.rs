use crate::money::Money;

/// Public record of accepted offers and trades, bucketed by price.
///
/// Only information announced to the whole market goes in here; trader values
/// never do. Prices above the grid maximum fall into the top bucket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicHistory {
    grid_max: Money,
    bids_made: Vec<u64>,
    bids_taken: Vec<u64>,
    asks_made: Vec<u64>,
    asks_taken: Vec<u64>,
    trade_count: u64,
    trade_sum: u128,
}

impl PublicHistory {
    pub fn new(grid_max: Money) -> Self {
        let n = grid_max.0 as usize + 1;
        PublicHistory {
            grid_max,
            bids_made: vec![0; n],
            bids_taken: vec![0; n],
            asks_made: vec![0; n],
            asks_taken: vec![0; n],
            trade_count: 0,
            trade_sum: 0,
        }
    }

    pub fn grid_max(&self) -> Money {
        self.grid_max
    }

    pub fn clear(&mut self) {
        *self = PublicHistory::new(self.grid_max);
    }

    #[inline]
    fn bucket(&self, p: Money) -> usize {
        p.0.min(self.grid_max.0) as usize
    }

    pub fn record_bid(&mut self, p: Money) {
        let i = self.bucket(p);
        self.bids_made[i] += 1;
    }

    pub fn record_ask(&mut self, p: Money) {
        let i = self.bucket(p);
        self.asks_made[i] += 1;
    }

    /// A standing bid was accepted by a seller.
    pub fn record_bid_taken(&mut self, p: Money) {
        let i = self.bucket(p);
        self.bids_taken[i] += 1;
        self.record_trade(p);
    }

    /// A standing ask was accepted by a buyer.
    pub fn record_ask_taken(&mut self, p: Money) {
        let i = self.bucket(p);
        self.asks_taken[i] += 1;
        self.record_trade(p);
    }

    fn record_trade(&mut self, p: Money) {
        self.trade_count += 1;
        self.trade_sum += p.0 as u128;
    }

    pub fn trade_count(&self) -> u64 {
        self.trade_count
    }

    /// Mean traded price in ticks, if anything has traded.
    pub fn mean_trade_price(&self) -> Option<f64> {
        (self.trade_count > 0).then(|| self.trade_sum as f64 / self.trade_count as f64)
    }

    pub fn bids_made(&self) -> &[u64] {
        &self.bids_made
    }

    pub fn bids_taken(&self) -> &[u64] {
        &self.bids_taken
    }

    pub fn asks_made(&self) -> &[u64] {
        &self.asks_made
    }

    pub fn asks_taken(&self) -> &[u64] {
        &self.asks_taken
    }
}
