use std::collections::BTreeMap;

use crate::agents::AgentPolicy;
use crate::engine::history::PublicHistory;
use crate::engine::market::{MarketState, Trade};
use crate::engine::round::{run_round, RoundConfig, RoundLog};
use crate::error::{EngineError, GridError, ProfileError};
use crate::money::{Money, TickSize};
use crate::rng::SimRng;
use crate::values::ValueProfile;
use crate::Side;

/// Consecutive rounds under one treatment.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub treatment: String,
    pub profile: ValueProfile,
    pub rounds: u32,
}

/// Policy per trader: a default, optional per-side policies, and overrides
/// by trader id.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentAssignment {
    pub default: AgentPolicy,
    pub buyers: Option<AgentPolicy>,
    pub sellers: Option<AgentPolicy>,
    pub overrides: BTreeMap<u32, AgentPolicy>,
}

impl AgentAssignment {
    pub fn uniform(policy: AgentPolicy) -> Self {
        AgentAssignment {
            default: policy,
            buyers: None,
            sellers: None,
            overrides: BTreeMap::new(),
        }
    }

    pub fn roster(&self, market: &MarketState) -> Vec<AgentPolicy> {
        market
            .traders()
            .iter()
            .map(|t| {
                if let Some(p) = self.overrides.get(&t.id.0) {
                    return p.clone();
                }
                let side = match t.side {
                    Side::Buyer => &self.buyers,
                    Side::Seller => &self.sellers,
                };
                side.clone().unwrap_or_else(|| self.default.clone())
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionConfig {
    pub session: u32,
    pub blocks: Vec<Block>,
    /// Queued traders per side; zero for dropout sessions.
    pub queue_per_side: usize,
    pub round: RoundConfig,
    pub agents: AgentAssignment,
    pub seed: u64,
    /// Session round numbers (from 1) at whose start seat values are
    /// reshuffled within each side.
    pub reshuffle_at: Vec<u32>,
    /// Top of the public price grid used by belief-based policies.
    pub grid_max: Money,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionRound {
    pub treatment: String,
    pub profile: ValueProfile,
    pub log: RoundLog,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionLog {
    pub session: u32,
    pub seed: u64,
    pub tick: TickSize,
    pub rounds: Vec<SessionRound>,
}

impl SessionLog {
    pub fn trades(&self) -> impl Iterator<Item = (&str, &Trade)> {
        self.rounds
            .iter()
            .flat_map(|r| r.log.trades.iter().map(move |t| (r.treatment.as_str(), t)))
    }

    /// Trade prices under one treatment, in session order.
    pub fn prices(&self, treatment: &str) -> Vec<Money> {
        self.trades()
            .filter(|(name, _)| *name == treatment)
            .map(|(_, t)| t.price)
            .collect()
    }
}

/// Runs every block in order on one random stream. Public history carries
/// over across rounds and blocks; quotes reset each round.
pub fn run_session(config: &SessionConfig) -> Result<SessionLog, EngineError> {
    let mut rng = SimRng::with_stream(config.seed, config.session as u64);
    let tick = config
        .blocks
        .first()
        .map_or(TickSize::POUND, |b| b.profile.tick());
    if let Some(b) = config.blocks.iter().find(|b| b.profile.tick() != tick) {
        return Err(ProfileError::Grid(GridError::Mismatch {
            left: tick.pence(),
            right: b.profile.tick().pence(),
        })
        .into());
    }
    let mut history = PublicHistory::new(config.grid_max);
    let mut rounds = Vec::new();
    let mut round_no = 0u32;
    for block in &config.blocks {
        let mut market = MarketState::new(&block.profile, config.queue_per_side, config.round.rules);
        let policies = config.agents.roster(&market);
        let mut buyers = block.profile.buyers().to_vec();
        let mut sellers = block.profile.sellers().to_vec();
        for _ in 0..block.rounds {
            round_no += 1;
            if config.reshuffle_at.contains(&round_no) {
                rng.shuffle(&mut buyers);
                rng.shuffle(&mut sellers);
            }
            market.start_round(round_no, &buyers, &sellers);
            let log = run_round(&mut market, &policies, &mut history, &config.round, &mut rng)?;
            rounds.push(SessionRound {
                treatment: block.treatment.clone(),
                profile: block.profile.clone(),
                log,
            });
        }
    }
    Ok(SessionLog {
        session: config.session,
        seed: config.seed,
        tick,
        rounds,
    })
}
