//! CSV offer, trade and path logs.
//!
//! Every file starts with one comment line naming the tick size, the random
//! generator and the seed, e.g. `# tick_size=100; rng=chacha8; seed=42`,
//! followed by a CSV header row. Amounts are integer ticks; absent quotes are
//! empty fields.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::engine::{ActionKind, OutcomeKind, SessionLog, Trade, TraderId};
use crate::error::LogError;
use crate::marshallian::PathReport;
use crate::money::{Money, TickSize};
use crate::rng::RNG_NAME;
use crate::Side;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OfferRecord {
    pub session: u32,
    pub treatment: String,
    pub round: u32,
    pub seq: u32,
    pub trader_id: u32,
    pub side: Side,
    pub trader_value: u64,
    pub action: ActionKind,
    pub amount: Option<u64>,
    pub outcome: OutcomeKind,
    pub market_bid_after: Option<u64>,
    pub market_ask_after: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub session: u32,
    pub treatment: String,
    pub round: u32,
    pub trade_seq: u32,
    pub buyer_id: u32,
    pub seller_id: u32,
    pub buyer_value: u64,
    pub seller_cost: u64,
    pub price: u64,
    pub offers_before: u32,
}

impl TradeRecord {
    pub fn to_trade(&self) -> Trade {
        Trade {
            round: self.round,
            seq: self.trade_seq,
            buyer_id: TraderId(self.buyer_id),
            seller_id: TraderId(self.seller_id),
            buyer_value: Money(self.buyer_value),
            seller_cost: Money(self.seller_cost),
            price: Money(self.price),
            offers_before: self.offers_before,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathRow {
    pub session: u32,
    pub round: u32,
    pub treatment: String,
    pub trades: usize,
    pub order_conforms: bool,
    pub all_beneficial_traded: bool,
    pub prices_ir: bool,
    pub final_price_in_band: bool,
}

impl PathRow {
    pub fn new(session: u32, round: u32, treatment: &str, trades: usize, report: &PathReport) -> Self {
        PathRow {
            session,
            round,
            treatment: treatment.to_string(),
            trades,
            order_conforms: report.order_conforms,
            all_beneficial_traded: report.all_beneficial_traded,
            prices_ir: report.prices_ir,
            final_price_in_band: report.final_price_in_band,
        }
    }
}

pub fn offer_records(log: &SessionLog) -> Vec<OfferRecord> {
    log.rounds
        .iter()
        .flat_map(|r| {
            r.log.offers.iter().map(move |e| OfferRecord {
                session: log.session,
                treatment: r.treatment.clone(),
                round: e.round,
                seq: e.seq,
                trader_id: e.trader_id.0,
                side: e.side,
                trader_value: e.trader_value.0,
                action: e.action,
                amount: e.amount.map(Money::ticks),
                outcome: e.outcome,
                market_bid_after: e.market_bid_after.map(Money::ticks),
                market_ask_after: e.market_ask_after.map(Money::ticks),
            })
        })
        .collect()
}

pub fn trade_records(log: &SessionLog) -> Vec<TradeRecord> {
    log.rounds
        .iter()
        .flat_map(|r| {
            r.log.trades.iter().map(move |t| TradeRecord {
                session: log.session,
                treatment: r.treatment.clone(),
                round: t.round,
                trade_seq: t.seq,
                buyer_id: t.buyer_id.0,
                seller_id: t.seller_id.0,
                buyer_value: t.buyer_value.0,
                seller_cost: t.seller_cost.0,
                price: t.price.0,
                offers_before: t.offers_before,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogHeader {
    pub tick: TickSize,
    pub rng: String,
    pub seed: Option<u64>,
}

impl LogHeader {
    pub fn new(tick: TickSize, seed: Option<u64>) -> Self {
        LogHeader {
            tick,
            rng: RNG_NAME.to_string(),
            seed,
        }
    }

    pub fn line(&self) -> String {
        let mut s = format!("# tick_size={}; rng={}", self.tick.pence(), self.rng);
        if let Some(seed) = self.seed {
            s.push_str(&format!("; seed={seed}"));
        }
        s
    }

    pub fn parse(line: &str) -> Result<Self, LogError> {
        let body = line.trim().strip_prefix('#').ok_or(LogError::Header)?;
        let (mut tick, mut rng, mut seed) = (None, String::new(), None);
        for part in body.split(';') {
            let Some((k, v)) = part.split_once('=') else {
                continue;
            };
            match k.trim() {
                "tick_size" => {
                    let pence = v.trim().parse().map_err(|_| LogError::Header)?;
                    tick = Some(TickSize::new(pence)?);
                }
                "rng" => rng = v.trim().to_string(),
                "seed" => seed = Some(v.trim().parse().map_err(|_| LogError::Header)?),
                _ => {}
            }
        }
        Ok(LogHeader {
            tick: tick.ok_or(LogError::Header)?,
            rng,
            seed,
        })
    }
}

pub fn write_csv<W: Write, T: Serialize>(mut out: W, header: &LogHeader, rows: &[T]) -> Result<(), LogError> {
    writeln!(out, "{}", header.line())?;
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the header and column names even when there are no rows.
pub fn write_csv_with_columns<W: Write, T: Serialize>(
    mut out: W,
    header: &LogHeader,
    columns: &[&str],
    rows: &[T],
) -> Result<(), LogError> {
    if !rows.is_empty() {
        return write_csv(out, header, rows);
    }
    writeln!(out, "{}", header.line())?;
    writeln!(out, "{}", columns.join(","))?;
    Ok(())
}

pub fn read_csv<R: Read, T: DeserializeOwned>(mut input: R) -> Result<(LogHeader, Vec<T>), LogError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let (first, rest) = text.split_once('\n').unwrap_or((text.as_str(), ""));
    let header = LogHeader::parse(first)?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(rest.as_bytes());
    let rows = r.deserialize().collect::<Result<Vec<T>, _>>()?;
    Ok((header, rows))
}

pub const OFFER_COLUMNS: &[&str] = &[
    "session",
    "treatment",
    "round",
    "seq",
    "trader_id",
    "side",
    "trader_value",
    "action",
    "amount",
    "outcome",
    "market_bid_after",
    "market_ask_after",
];

pub const TRADE_COLUMNS: &[&str] = &[
    "session",
    "treatment",
    "round",
    "trade_seq",
    "buyer_id",
    "seller_id",
    "buyer_value",
    "seller_cost",
    "price",
    "offers_before",
];

pub fn offers_path(dir: &Path, session: u32) -> PathBuf {
    dir.join(format!("session{session}_offers.csv"))
}

pub fn trades_path(dir: &Path, session: u32) -> PathBuf {
    dir.join(format!("session{session}_trades.csv"))
}

/// Writes `session<N>_offers.csv` and `session<N>_trades.csv` under `dir`.
pub fn write_session(dir: &Path, log: &SessionLog) -> Result<(PathBuf, PathBuf), LogError> {
    fs::create_dir_all(dir)?;
    let header = LogHeader::new(log.tick, Some(log.seed));
    let offers = offers_path(dir, log.session);
    let trades = trades_path(dir, log.session);
    write_csv_with_columns(fs::File::create(&offers)?, &header, OFFER_COLUMNS, &offer_records(log))?;
    write_csv_with_columns(fs::File::create(&trades)?, &header, TRADE_COLUMNS, &trade_records(log))?;
    Ok((offers, trades))
}

pub fn read_offers(path: &Path) -> Result<(LogHeader, Vec<OfferRecord>), LogError> {
    read_csv(fs::File::open(path)?)
}

pub fn read_trades(path: &Path) -> Result<(LogHeader, Vec<TradeRecord>), LogError> {
    read_csv(fs::File::open(path)?)
}
