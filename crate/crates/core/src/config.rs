//! Treatment, session and shift configuration.
//!
//! A flat `key = value` text format with `[kind name]` sections:
//!
//! ```text
//! seed = 7
//!
//! [treatment symmetric]
//! tick_size = 100
//! buyers = 12, 32, 52, 72, 92
//! sellers = 8, 28, 48, 68, 88
//!
//! [session 1]
//! treatments = symmetric:5, low_values:5
//! queue = true
//! agents = gd
//! seller_agents = zi(100)
//! agent.3 = reservation(0.5)
//!
//! [shift symmetric_to_low]
//! from = symmetric
//! p_star = 50
//! buyer_map = 12:0, 32:0, 52:52, 72:52, 92:52
//! ```
//!
//! Amounts are currency (`52`, `49.99`) on the treatment's tick grid. `#`
//! starts a comment. Unknown keys are errors.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::agents::AgentPolicy;
use crate::engine::{
    AgentAssignment, Block, IrPolicy, MarketRules, Mode, RoundConfig, SessionConfig,
};
use crate::error::ConfigError;
use crate::money::{Money, TickSize};
use crate::shifts::{Direction, ShiftSpec};
use crate::values::ValueProfile;
use crate::Side;

pub const BUILTIN_TREATMENTS: &str = include_str!("../data/treatments.cfg");
pub const BUILTIN_SESSIONS: &str = include_str!("../data/sessions.cfg");
pub const BUILTIN_SHIFTS: &str = include_str!("../data/shifts.cfg");

pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Treatment {
    pub name: String,
    pub profile: ValueProfile,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionSpec {
    pub id: u32,
    /// Treatment names with round counts, in order.
    pub blocks: Vec<(String, u32)>,
    pub queue: bool,
    pub queue_per_side: usize,
    pub trades_per_round: u32,
    pub quiescence_passes: u32,
    pub offer_ceiling: u64,
    pub improvement_rule: bool,
    pub trade_on_cross: bool,
    pub enforce_ir: IrPolicy,
    pub recycle: bool,
    pub agents: Vec<AgentSetting>,
    pub reshuffle_at: Vec<u32>,
    pub seed: Option<u64>,
    /// Top of the public price grid in currency text, parsed per tick grid.
    pub grid_max: Option<String>,
}

/// Agent policy text kept unparsed until the tick grid is known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentSetting {
    pub target: AgentTarget,
    pub policy: String,
    pub line: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgentTarget {
    All,
    Side(Side),
    Trader(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftDef {
    pub name: String,
    pub from: Option<String>,
    pub to: Option<String>,
    pub buyer: ShiftSpec,
    pub seller: ShiftSpec,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    pub seed: Option<u64>,
    pub treatments: BTreeMap<String, Treatment>,
    pub sessions: Vec<SessionSpec>,
    pub shifts: BTreeMap<String, ShiftDef>,
}

struct Section {
    kind: String,
    name: String,
    line: usize,
    entries: Vec<(usize, String, String)>,
}

fn field(line: usize, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

type Entry = (usize, String, String);

fn split_sections(text: &str) -> Result<(Vec<Entry>, Vec<Section>), ConfigError> {
    let mut top = Vec::new();
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(inner) = content.strip_prefix('[') {
            let inner = inner.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                message: "unterminated section header".into(),
            })?;
            let mut parts = inner.split_whitespace();
            let (Some(kind), Some(name), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(ConfigError::Syntax {
                    line,
                    message: "section header must be `[kind name]`".into(),
                });
            };
            if !matches!(kind, "treatment" | "session" | "shift") {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("unknown section kind `{kind}`"),
                });
            }
            sections.push(Section {
                kind: kind.to_string(),
                name: name.to_string(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: "expected `key = value`".into(),
        })?;
        let entry = (line, k.trim().to_string(), v.trim().to_string());
        match sections.last_mut() {
            Some(s) => s.entries.push(entry),
            None => top.push(entry),
        }
    }
    Ok((top, sections))
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(field(line, key, format!("expected true or false, got `{v}`"))),
    }
}

fn parse_num<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| field(line, key, format!("expected a whole number, got `{v}`")))
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_amounts(line: usize, key: &str, v: &str, tick: TickSize) -> Result<Vec<Money>, ConfigError> {
    list(v)
        .map(|a| tick.parse_amount(a).map_err(|e| field(line, key, e.to_string())))
        .collect()
}

fn parse_map(line: usize, key: &str, v: &str, tick: TickSize) -> Result<BTreeMap<Money, Money>, ConfigError> {
    let mut map = BTreeMap::new();
    for pair in list(v) {
        let (a, b) = pair
            .split_once(':')
            .ok_or_else(|| field(line, key, format!("expected `value:image`, got `{pair}`")))?;
        let a = tick.parse_amount(a.trim()).map_err(|e| field(line, key, e.to_string()))?;
        let b = tick.parse_amount(b.trim()).map_err(|e| field(line, key, e.to_string()))?;
        if map.insert(a, b).is_some() {
            return Err(field(line, key, format!("value {} mapped twice", a)));
        }
    }
    Ok(map)
}

/// Parses `zi`, `zi(120)`, `gd`, `gd(2)`, `reservation(0.4)` or `idle`.
pub fn parse_policy(text: &str, tick: TickSize) -> Result<AgentPolicy, String> {
    let text = text.trim();
    let (name, arg) = match text.split_once('(') {
        Some((n, rest)) => {
            let arg = rest
                .strip_suffix(')')
                .ok_or_else(|| format!("unbalanced parentheses in `{text}`"))?;
            (n.trim(), Some(arg.trim()))
        }
        None => (text, None),
    };
    match (name, arg) {
        ("zi", None) => Ok(AgentPolicy::zi(hundred_pounds(tick)?)),
        ("zi", Some(a)) => tick.parse_amount(a).map(AgentPolicy::zi).map_err(|e| e.to_string()),
        ("gd", None) => Ok(AgentPolicy::gd()),
        ("gd", Some(a)) => a
            .parse()
            .map(|w: u64| AgentPolicy::Gd { prior_weight: w.max(1) })
            .map_err(|_| format!("bad prior weight `{a}`")),
        ("reservation", a) => {
            let gamma: f64 = a
                .unwrap_or("0.5")
                .parse()
                .map_err(|_| format!("bad patience in `{text}`"))?;
            if !(0.0..=1.0).contains(&gamma) {
                return Err(format!("patience must lie in [0, 1], got {gamma}"));
            }
            Ok(AgentPolicy::reservation(gamma))
        }
        ("idle", None) => Ok(AgentPolicy::Idle),
        _ => Err(format!("unknown agent policy `{text}`")),
    }
}

/// £100 on the given grid, the default maximum ask and price grid top.
pub fn hundred_pounds(tick: TickSize) -> Result<Money, String> {
    tick.from_pence(10_000).map_err(|e| e.to_string())
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        Config::default().extend(text)
    }

    /// Adds the sections of `text`. Sessions and shifts may name treatments
    /// already present.
    pub fn extend(mut self, text: &str) -> Result<Config, ConfigError> {
        let (top, sections) = split_sections(text)?;
        for (line, k, v) in top {
            match k.as_str() {
                "seed" => self.seed = Some(parse_num(line, &k, &v)?),
                _ => return Err(ConfigError::UnknownKey { line, key: k }),
            }
        }
        for s in &sections {
            if s.kind == "treatment" {
                let t = parse_treatment(s)?;
                self.treatments.insert(t.name.clone(), t);
            }
        }
        for s in &sections {
            match s.kind.as_str() {
                "session" => self.sessions.push(parse_session(s)?),
                "shift" => {
                    let d = parse_shift(s, &self)?;
                    self.shifts.insert(d.name.clone(), d);
                }
                _ => {}
            }
        }
        Ok(self)
    }

    /// Built-in treatments, sessions and shifts.
    pub fn builtin() -> Config {
        Config::builtin_values()
            .extend(BUILTIN_SESSIONS)
            .expect("built-in sessions parse")
    }

    fn builtin_values() -> Config {
        Config::parse(BUILTIN_TREATMENTS)
            .and_then(|c| c.extend(BUILTIN_SHIFTS))
            .expect("built-in treatments parse")
    }

    /// Parses `text` on top of the built-in treatments and shifts, so configs
    /// can name `symmetric`, `low_values` or `intro_99` without redefining
    /// them. Built-in sessions are not included.
    pub fn parse_with_builtins(text: &str) -> Result<Config, ConfigError> {
        Config::builtin_values().extend(text)
    }

    pub fn treatment(&self, name: &str) -> Result<&Treatment, ConfigError> {
        self.treatments
            .get(name)
            .ok_or_else(|| ConfigError::UnknownTreatment(name.to_string()))
    }

    /// Engine configuration for one session. `seed` overrides the file.
    pub fn session_config(&self, spec: &SessionSpec, seed: Option<u64>) -> Result<SessionConfig, ConfigError> {
        let name = format!("session {}", spec.id);
        let invalid = |message: String| ConfigError::Invalid {
            name: name.clone(),
            message,
        };
        let mut blocks = Vec::new();
        for (t, rounds) in &spec.blocks {
            let tr = self.treatment(t)?;
            blocks.push(Block {
                treatment: t.clone(),
                profile: tr.profile.clone(),
                rounds: *rounds,
            });
        }
        let tick = blocks.first().map_or(TickSize::POUND, |b| b.profile.tick());
        let grid_max = match &spec.grid_max {
            Some(text) => tick.parse_amount(text).map_err(|e| invalid(e.to_string()))?,
            None => hundred_pounds(tick).map_err(invalid)?,
        };
        let mut agents = AgentAssignment::uniform(AgentPolicy::gd());
        for setting in &spec.agents {
            let policy = parse_policy(&setting.policy, tick).map_err(|m| ConfigError::Field {
                line: setting.line,
                key: "agents".into(),
                message: m,
            })?;
            match setting.target {
                AgentTarget::All => agents.default = policy,
                AgentTarget::Side(Side::Buyer) => agents.buyers = Some(policy),
                AgentTarget::Side(Side::Seller) => agents.sellers = Some(policy),
                AgentTarget::Trader(id) => {
                    agents.overrides.insert(id, policy);
                }
            }
        }
        let rules = MarketRules {
            mode: if spec.queue { Mode::Queue } else { Mode::Dropout },
            improvement_rule: spec.improvement_rule,
            trade_on_cross: spec.trade_on_cross,
            enforce_ir: spec.enforce_ir,
            recycle: spec.recycle,
        };
        Ok(SessionConfig {
            session: spec.id,
            blocks,
            queue_per_side: if spec.queue { spec.queue_per_side } else { 0 },
            round: RoundConfig {
                rules,
                trades_per_round: spec.queue.then_some(spec.trades_per_round),
                quiescence_passes: spec.quiescence_passes,
                offer_ceiling: spec.offer_ceiling,
            },
            agents,
            seed: seed.or(spec.seed).or(self.seed).unwrap_or(DEFAULT_SEED),
            reshuffle_at: spec.reshuffle_at.clone(),
            grid_max,
        })
    }
}

fn parse_treatment(s: &Section) -> Result<Treatment, ConfigError> {
    let mut tick = TickSize::POUND;
    if let Some((line, k, v)) = s.entries.iter().find(|(_, k, _)| k == "tick_size") {
        tick = v.parse().map_err(|e: crate::error::GridError| field(*line, k, e.to_string()))?;
    }
    let (mut buyers, mut sellers) = (None, None);
    for (line, k, v) in &s.entries {
        match k.as_str() {
            "tick_size" => {}
            "buyers" => buyers = Some(parse_amounts(*line, k, v, tick)?),
            "sellers" => sellers = Some(parse_amounts(*line, k, v, tick)?),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: *line,
                    key: k.clone(),
                })
            }
        }
    }
    let missing = |key| ConfigError::Missing {
        name: s.name.clone(),
        key,
    };
    let profile = ValueProfile::new(
        buyers.ok_or_else(|| missing("buyers"))?,
        sellers.ok_or_else(|| missing("sellers"))?,
        tick,
    )
    .map_err(|e| ConfigError::Invalid {
        name: s.name.clone(),
        message: e.to_string(),
    })?;
    Ok(Treatment {
        name: s.name.clone(),
        profile,
    })
}

fn parse_session(s: &Section) -> Result<SessionSpec, ConfigError> {
    let id: u32 = s.name.parse().map_err(|_| ConfigError::Syntax {
        line: s.line,
        message: format!("session name must be a number, got `{}`", s.name),
    })?;
    let mut spec = SessionSpec {
        id,
        blocks: Vec::new(),
        queue: true,
        queue_per_side: 4,
        trades_per_round: 0,
        quiescence_passes: 1,
        offer_ceiling: 1_000_000,
        improvement_rule: true,
        trade_on_cross: true,
        enforce_ir: IrPolicy::Warn,
        recycle: false,
        agents: Vec::new(),
        reshuffle_at: Vec::new(),
        seed: None,
        grid_max: None,
    };
    let mut raw_blocks: Option<(usize, String)> = None;
    let mut rounds: Option<u32> = None;
    let mut trades: Option<u32> = None;
    for (line, k, v) in &s.entries {
        let (line, k, v) = (*line, k.as_str(), v.as_str());
        match k {
            "treatments" | "treatment" => raw_blocks = Some((line, v.to_string())),
            "rounds" => rounds = Some(parse_num(line, k, v)?),
            "queue" => spec.queue = parse_bool(line, k, v)?,
            "queue_per_side" => spec.queue_per_side = parse_num(line, k, v)?,
            "trades_per_round" => trades = Some(parse_num(line, k, v)?),
            "quiescence_passes" => spec.quiescence_passes = parse_num(line, k, v)?,
            "offer_ceiling" => spec.offer_ceiling = parse_num(line, k, v)?,
            "improvement_rule" => spec.improvement_rule = parse_bool(line, k, v)?,
            "trade_on_cross" => spec.trade_on_cross = parse_bool(line, k, v)?,
            "recycle" => spec.recycle = parse_bool(line, k, v)?,
            "enforce_ir" => {
                spec.enforce_ir = match v {
                    "reject" => IrPolicy::Reject,
                    "warn" => IrPolicy::Warn,
                    _ => return Err(field(line, k, format!("expected reject or warn, got `{v}`"))),
                }
            }
            "seed" => spec.seed = Some(parse_num(line, k, v)?),
            "grid_max" => spec.grid_max = Some(v.to_string()),
            "reshuffle_at" => {
                spec.reshuffle_at = list(v).map(|r| parse_num(line, k, r)).collect::<Result<_, _>>()?
            }
            "agents" | "buyer_agents" | "seller_agents" => {
                let target = match k {
                    "agents" => AgentTarget::All,
                    "buyer_agents" => AgentTarget::Side(Side::Buyer),
                    _ => AgentTarget::Side(Side::Seller),
                };
                parse_policy(v, TickSize::PENNY).map_err(|m| field(line, k, m))?;
                spec.agents.push(AgentSetting {
                    target,
                    policy: v.to_string(),
                    line,
                });
            }
            _ if k.starts_with("agent.") => {
                let id: u32 = parse_num(line, k, &k["agent.".len()..])?;
                parse_policy(v, TickSize::PENNY).map_err(|m| field(line, k, m))?;
                spec.agents.push(AgentSetting {
                    target: AgentTarget::Trader(id),
                    policy: v.to_string(),
                    line,
                });
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: k.to_string(),
                })
            }
        }
    }
    let (line, text) = raw_blocks.ok_or_else(|| ConfigError::Missing {
        name: format!("session {id}"),
        key: "treatments",
    })?;
    for item in list(&text) {
        let (name, n) = match item.split_once(':') {
            Some((name, n)) => (name.trim(), parse_num(line, "treatments", n.trim())?),
            None => (
                item,
                rounds.ok_or_else(|| field(line, "treatments", format!("no round count for `{item}`; write `{item}:N` or set rounds")))?,
            ),
        };
        spec.blocks.push((name.to_string(), n));
    }
    spec.trades_per_round = trades.unwrap_or(spec.queue_per_side as u32);
    Ok(spec)
}

fn parse_shift(s: &Section, config: &Config) -> Result<ShiftDef, ConfigError> {
    let get = |key: &str| s.entries.iter().find(|(_, k, _)| k == key);
    let from = get("from").map(|(_, _, v)| v.clone());
    let mut tick = match &from {
        Some(t) => config.treatment(t)?.profile.tick(),
        None => TickSize::POUND,
    };
    if let Some((line, k, v)) = get("tick_size") {
        tick = v.parse().map_err(|e: crate::error::GridError| field(*line, k, e.to_string()))?;
    }
    let mut direction = Direction::Down;
    let (mut p_star, mut eps_minus, mut eps_plus) = (None, None, None);
    let (mut buyer_map, mut seller_map) = (None, None);
    let mut to = None;
    for (line, k, v) in &s.entries {
        let (line, k, v) = (*line, k.as_str(), v.as_str());
        let amount = || tick.parse_amount(v).map_err(|e| field(line, k, e.to_string()));
        match k {
            "from" | "tick_size" => {}
            "to" => to = Some(v.to_string()),
            "direction" => {
                direction = match v {
                    "down" => Direction::Down,
                    "up" => Direction::Up,
                    _ => return Err(field(line, k, format!("expected down or up, got `{v}`"))),
                }
            }
            "p_star" => p_star = Some(amount()?),
            "eps_minus" => eps_minus = Some(amount()?),
            "eps_plus" => eps_plus = Some(amount()?),
            "buyer_map" => buyer_map = Some(parse_map(line, k, v, tick)?),
            "seller_map" => seller_map = Some(parse_map(line, k, v, tick)?),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: k.to_string(),
                })
            }
        }
    }
    let missing = |key| ConfigError::Missing {
        name: s.name.clone(),
        key,
    };
    let p_star = p_star.ok_or_else(|| missing("p_star"))?;
    let eps_minus = eps_minus.ok_or_else(|| missing("eps_minus"))?;
    let eps_plus = eps_plus.ok_or_else(|| missing("eps_plus"))?;
    let spec = |side, map: Option<BTreeMap<Money, Money>>, key| {
        Ok::<_, ConfigError>(ShiftSpec {
            side,
            direction,
            p_star,
            eps_minus,
            eps_plus,
            map: map.ok_or_else(|| missing(key))?,
        })
    };
    Ok(ShiftDef {
        name: s.name.clone(),
        from,
        to,
        buyer: spec(Side::Buyer, buyer_map, "buyer_map")?,
        seller: spec(Side::Seller, seller_map, "seller_map")?,
    })
}
