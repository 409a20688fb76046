//! Price statistics, log cleaning, quote trajectories and summary tables.

pub mod filter;
pub mod stats;
pub mod summary;
pub mod trajectory;

pub use filter::{filter_offers, FilterReport};
pub use stats::{
    one_sample_t_test, stochastic_ce_test, t_test_unpaired, trend_test, TestKind, TestResult,
    Variance,
};
pub use summary::{price_series, summarize, PriceSeries, SummaryRow};
pub use trajectory::{quote_trajectory, replay_quotes, TrajectoryPoint};
