//! Oral double-auction engine: quote state, the per-offer protocol, round
//! and session loops.

mod history;
mod market;
mod round;
mod session;

pub use history::PublicHistory;
pub use market::{
    Action, ActionKind, IrPolicy, MarketRules, MarketState, Mode, Outcome, OutcomeKind, Quote,
    RejectReason, Status, Trade, TraderId, TraderState,
};
pub use round::{
    run_round, run_stream, step, OfferEvent, Recorder, RoundConfig, RoundEnd, RoundLog, StreamStats,
};
pub use session::{
    run_session, AgentAssignment, Block, SessionConfig, SessionLog, SessionRound,
};
