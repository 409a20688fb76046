use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Args;

use dalab::analysis::stats::{stochastic_ce_test, trend_test, welch_t_test};
use dalab::analysis::{filter_offers, price_series, quote_trajectory, summarize, TrajectoryPoint};
use dalab::config::{hundred_pounds, Config};
use dalab::logs::{read_offers, read_trades, write_csv_with_columns, LogHeader, OfferRecord, PathRow, TradeRecord};
use dalab::marshallian::{check_path, conformance_rate};
use dalab::{ce_set, TickSize, ValueProfile};

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Log files or directories holding `*_offers.csv` and `*_trades.csv`.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Configuration with the treatments named in the logs.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for summary, path and trajectory CSVs.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn collect_files(inputs: &[PathBuf]) -> Result<(Vec<PathBuf>, Vec<PathBuf>)> {
    let (mut offers, mut trades) = (Vec::new(), Vec::new());
    let mut push = |p: PathBuf| {
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.ends_with("_offers.csv") {
            offers.push(p);
        } else if name.ends_with("_trades.csv") {
            trades.push(p);
        }
    };
    for input in inputs {
        if input.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(input)
                .with_context(|| format!("reading {}", input.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            entries.sort();
            entries.into_iter().for_each(&mut push);
        } else if input.is_file() {
            push(input.clone());
        } else {
            bail!("{}: no such file or directory", input.display());
        }
    }
    Ok((offers, trades))
}

fn common_tick(headers: &[LogHeader]) -> Result<TickSize> {
    let ticks: BTreeSet<u32> = headers.iter().map(|h| h.tick.pence()).collect();
    match ticks.len() {
        0 => Ok(TickSize::POUND),
        1 => Ok(TickSize::new(*ticks.iter().next().unwrap())?),
        _ => bail!("logs mix tick sizes {ticks:?}"),
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.3}"))
}

pub fn run(args: AnalyzeArgs) -> Result<ExitCode> {
    let config = match &args.config {
        None => Config::builtin(),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Config::parse_with_builtins(&text).with_context(|| format!("{}", p.display()))?
        }
    };
    let (offer_files, trade_files) = collect_files(&args.inputs)?;
    let mut headers = Vec::new();
    let (mut offers, mut trades): (Vec<OfferRecord>, Vec<TradeRecord>) = (Vec::new(), Vec::new());
    for f in &offer_files {
        let (h, rows) = read_offers(f).with_context(|| format!("{}", f.display()))?;
        headers.push(h);
        offers.extend(rows);
    }
    for f in &trade_files {
        let (h, rows) = read_trades(f).with_context(|| format!("{}", f.display()))?;
        headers.push(h);
        trades.extend(rows);
    }
    let tick = common_tick(&headers)?;
    println!(
        "read {} offer file(s), {} trade file(s): {} offers, {} trades (tick {tick}p)",
        offer_files.len(),
        trade_files.len(),
        offers.len(),
        trades.len()
    );
    if offers.is_empty() && trades.is_empty() {
        println!("empty log: no offers and no trades, so no summaries, tests or path checks");
        if let Some(dir) = &args.out_dir {
            write_outputs(dir, tick, &[], &[], &[])?;
        }
        return Ok(ExitCode::SUCCESS);
    }

    let profile_of = |name: &str| -> Option<ValueProfile> {
        config.treatments.get(name)?.profile.regrid(tick).ok()
    };
    let mut unknown: BTreeSet<String> = BTreeSet::new();

    let (kept, filter) = filter_offers(&offers, tick);
    println!("offer filter: {filter}");

    let summary = summarize(&kept, &trades, |t| profile_of(t).map(|p| ce_set(&p).weak));
    println!("\nsession treatment half rounds trades mean_price mean_bid mean_ask mean_change ce_hit_rate");
    for r in &summary {
        println!(
            "{} {} {} {} {} {} {} {} {} {}",
            r.session,
            r.treatment,
            r.half,
            r.rounds,
            r.trades,
            fmt_opt(r.mean_price),
            fmt_opt(r.mean_bid),
            fmt_opt(r.mean_ask),
            fmt_opt(r.mean_price_change),
            fmt_opt(r.ce_hit_rate)
        );
    }

    println!("\ntests (prices in ticks)");
    let series = price_series(&trades);
    for s in &series {
        let label = format!("session {} {} half {}", s.session, s.treatment, s.half);
        if let Some(p) = profile_of(&s.treatment) {
            match stochastic_ce_test(&s.prices, ce_set(&p).weak) {
                Ok(r) => println!("{label}: equilibrium mean: {r}"),
                Err(e) => println!("{label}: equilibrium mean: not computed ({e})"),
            }
        } else {
            unknown.insert(s.treatment.clone());
        }
        match trend_test(&s.prices) {
            Ok(r) => println!("{label}: trend: {r}"),
            Err(e) => println!("{label}: trend: not computed ({e})"),
        }
    }
    let mut by_session: BTreeMap<u32, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    for t in &trades {
        by_session
            .entry(t.session)
            .or_default()
            .entry(t.treatment.clone())
            .or_default()
            .push(t.price as f64);
    }
    for (session, groups) in &by_session {
        let names: Vec<&String> = groups.keys().collect();
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                let label = format!("session {session} {} vs {}", names[i], names[j]);
                match welch_t_test(&groups[names[i]], &groups[names[j]]) {
                    Ok(r) => println!("{label}: {r}"),
                    Err(e) => println!("{label}: not computed ({e})"),
                }
            }
        }
    }

    // Path checks per round, including rounds without trades.
    let mut rounds: BTreeMap<(u32, u32), String> = BTreeMap::new();
    for o in &offers {
        rounds.insert((o.session, o.round), o.treatment.clone());
    }
    for t in &trades {
        rounds.insert((t.session, t.round), t.treatment.clone());
    }
    let mut path_rows = Vec::new();
    let mut checked = Vec::new();
    for ((session, round), treatment) in &rounds {
        let Some(profile) = profile_of(treatment) else {
            unknown.insert(treatment.clone());
            continue;
        };
        let round_trades: Vec<_> = trades
            .iter()
            .filter(|t| t.session == *session && t.round == *round)
            .map(TradeRecord::to_trade)
            .collect();
        let report = check_path(&round_trades, &profile)?;
        path_rows.push(PathRow::new(*session, *round, treatment, round_trades.len(), &report));
        checked.push((round_trades, profile));
    }
    let conformance = conformance_rate(checked.iter().map(|(t, p)| (t.as_slice(), p)))?;
    println!("\nMarshallian paths: {conformance} rounds conform");
    if !unknown.is_empty() {
        println!("treatments without a known profile (skipped): {unknown:?}");
    }

    let mut trajectories = Vec::new();
    let ceiling = hundred_pounds(tick).map_err(anyhow::Error::msg)?;
    let mut sessions: BTreeSet<u32> = offers.iter().map(|o| o.session).collect();
    sessions.extend(trades.iter().map(|t| t.session));
    for session in sessions {
        let own: Vec<OfferRecord> = offers.iter().filter(|o| o.session == session).cloned().collect();
        let rounds: BTreeSet<u32> = own.iter().map(|o| o.round).collect();
        for round in rounds {
            for p in quote_trajectory(&own, round, ceiling) {
                trajectories.push(TrajectoryRow::new(session, round, p));
            }
        }
    }
    if let Some(dir) = &args.out_dir {
        write_outputs(dir, tick, &summary, &path_rows, &trajectories)?;
        println!("wrote summary.csv, paths.csv and trajectories.csv to {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(serde::Serialize)]
struct TrajectoryRow {
    session: u32,
    round: u32,
    seq: u32,
    bid: u64,
    ask: u64,
}

impl TrajectoryRow {
    fn new(session: u32, round: u32, p: TrajectoryPoint) -> Self {
        TrajectoryRow {
            session,
            round,
            seq: p.seq,
            bid: p.bid.0,
            ask: p.ask.0,
        }
    }
}

fn write_outputs(
    dir: &Path,
    tick: TickSize,
    summary: &[dalab::analysis::SummaryRow],
    paths: &[PathRow],
    trajectories: &[TrajectoryRow],
) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let header = LogHeader::new(tick, None);
    let open = |name: &str| fs::File::create(dir.join(name)).with_context(|| format!("creating {name}"));
    write_csv_with_columns(
        open("summary.csv")?,
        &header,
        &[
            "session",
            "treatment",
            "half",
            "rounds",
            "trades",
            "mean_price",
            "mean_bid",
            "mean_ask",
            "mean_price_change",
            "ce_hit_rate",
        ],
        summary,
    )?;
    write_csv_with_columns(
        open("paths.csv")?,
        &header,
        &[
            "session",
            "round",
            "treatment",
            "trades",
            "order_conforms",
            "all_beneficial_traded",
            "prices_ir",
            "final_price_in_band",
        ],
        paths,
    )?;
    write_csv_with_columns(
        open("trajectories.csv")?,
        &header,
        &["session", "round", "seq", "bid", "ask"],
        trajectories,
    )?;
    Ok(())
}
