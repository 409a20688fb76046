use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dalab::batch::{run_sessions, Execution};
use dalab::config::Config;
use dalab::logs::write_session;
use dalab::replicate::{replicate_zi, ZiOptions};
use dalab::shifts::{apply_shift, check_preservation, random_shift, validate_shift, Direction};
use dalab::{ce_set, Money, SimRng, TickSize, ValueProfile};

mod analyze;

#[derive(Parser)]
#[command(name = "dalab", version, about = "Double-auction laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Competitive equilibrium of a treatment or an explicit value profile.
    Ce(CeArgs),
    /// Validate, apply or fuzz equilibrium-preserving value shifts.
    #[command(subcommand)]
    Shift(ShiftCommand),
    /// Run the sessions of a configuration and write offer and trade logs.
    Simulate(SimulateArgs),
    /// Long zero-intelligence run on one treatment.
    ReplicateZi(ReplicateArgs),
    /// Summaries, tests and path checks over written logs.
    Analyze(analyze::AnalyzeArgs),
}

#[derive(Args)]
struct ProfileArgs {
    /// Treatment name from the built-ins or --config.
    #[arg(long, conflicts_with_all = ["buyers", "sellers"])]
    treatment: Option<String>,
    /// Comma-separated buyer values in pounds.
    #[arg(long, requires = "sellers")]
    buyers: Option<String>,
    /// Comma-separated seller costs in pounds.
    #[arg(long, requires = "buyers")]
    sellers: Option<String>,
    /// Tick size in pence for --buyers/--sellers.
    #[arg(long, default_value = "100")]
    tick: u32,
    /// Extra configuration file with treatments and shifts.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CeArgs {
    #[command(flatten)]
    profile: ProfileArgs,
}

#[derive(Subcommand)]
enum ShiftCommand {
    /// Check a named shift against the clauses and the equilibrium set.
    Validate(NamedShift),
    /// Print the shifted profile and both equilibrium sets.
    Apply(NamedShift),
    /// Random profiles and random valid shifts; reports any shift that moves the equilibrium set.
    Fuzz(FuzzArgs),
}

#[derive(Args)]
struct NamedShift {
    name: String,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Down,
    Up,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 500)]
    cases: usize,
    #[arg(long, value_enum, default_value = "down")]
    direction: DirectionArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Session configuration; the built-in sessions run when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides every session seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "logs")]
    out_dir: PathBuf,
    /// Sessions run concurrently on this many threads (0 = all cores).
    #[arg(long)]
    parallel_sessions: Option<usize>,
}

#[derive(Args)]
struct ReplicateArgs {
    #[arg(long, default_value = "symmetric")]
    treatment: String,
    #[arg(long, default_value_t = 10_000_000)]
    offers: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Tick size in pence for the run.
    #[arg(long, default_value_t = 1)]
    tick: u32,
    /// Highest ZI ask in pence.
    #[arg(long, default_value_t = 10_000)]
    max_ask: u64,
    /// Let offers that do not improve the market stand.
    #[arg(long)]
    no_improvement_rule: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        None => Ok(Config::builtin()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Config::parse_with_builtins(&text).with_context(|| format!("{}", p.display()))
        }
    }
}

fn resolve_profile(args: &ProfileArgs) -> Result<(String, ValueProfile)> {
    if let (Some(b), Some(s)) = (&args.buyers, &args.sellers) {
        let text = format!("[treatment cli]\ntick_size = {}\nbuyers = {b}\nsellers = {s}\n", args.tick);
        let c = Config::parse(&text).context("value profile")?;
        return Ok(("cli".into(), c.treatments["cli"].profile.clone()));
    }
    let name = args.treatment.as_deref().unwrap_or("symmetric");
    let config = load_config(args.config.as_deref())?;
    Ok((name.to_string(), config.treatment(name)?.profile.clone()))
}

fn pounds(tick: TickSize, m: Money) -> String {
    format!("{:.2}", tick.pounds(m))
}

fn list(tick: TickSize, values: &[Money]) -> String {
    values.iter().map(|v| pounds(tick, *v)).collect::<Vec<_>>().join(", ")
}

fn print_ce(name: &str, profile: &ValueProfile) {
    let tick = profile.tick();
    let ce = ce_set(profile);
    println!("treatment {name} (tick {tick}p)");
    println!("  buyers:  {}", list(tick, profile.buyers()));
    println!("  sellers: {}", list(tick, profile.sellers()));
    println!(
        "  weak CE prices:   {} .. {}",
        pounds(tick, ce.weak.lo),
        pounds(tick, ce.weak.hi)
    );
    let strict = ce.strict_prices();
    match (strict.first(), strict.last()) {
        (Some(a), Some(b)) => println!("  strict CE prices: {} .. {}", pounds(tick, *a), pounds(tick, *b)),
        _ => println!("  strict CE prices: none"),
    }
    println!("  quantity: {}", ce.quantity);
}

fn cmd_ce(args: CeArgs) -> Result<ExitCode> {
    let (name, profile) = resolve_profile(&args.profile)?;
    print_ce(&name, &profile);
    Ok(ExitCode::SUCCESS)
}

fn named_shift(args: &NamedShift) -> Result<(Config, dalab::config::ShiftDef, ValueProfile)> {
    let config = load_config(args.config.as_deref())?;
    let Some(def) = config.shifts.get(&args.name).cloned() else {
        bail!("unknown shift `{}`", args.name);
    };
    let Some(from) = def.from.clone() else {
        bail!("shift `{}` names no source treatment", args.name);
    };
    let profile = config.treatment(&from)?.profile.clone();
    Ok((config, def, profile))
}

fn cmd_shift(cmd: ShiftCommand) -> Result<ExitCode> {
    match cmd {
        ShiftCommand::Validate(args) => {
            let (_, def, profile) = named_shift(&args)?;
            let b = validate_shift(&def.buyer, profile.buyers())?;
            let s = validate_shift(&def.seller, profile.sellers())?;
            println!("buyer map:  {b}");
            println!("seller map: {s}");
            let shifted = apply_shift(&profile, &def.buyer, &def.seller)?;
            let kept = check_preservation(&profile, &shifted)?;
            println!("equilibrium set preserved: {kept}");
            Ok(if b.is_valid() && s.is_valid() && kept {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        ShiftCommand::Apply(args) => {
            let (config, def, profile) = named_shift(&args)?;
            let shifted = apply_shift(&profile, &def.buyer, &def.seller)?;
            print_ce(def.from.as_deref().unwrap_or("source"), &profile);
            print_ce(&format!("{} (shifted)", args.name), &shifted);
            if let Some(to) = &def.to {
                let target = &config.treatment(to)?.profile;
                let same = {
                    let (mut a, mut b) = (shifted.clone(), target.clone());
                    for p in [&mut a, &mut b] {
                        let mut bs = p.buyers().to_vec();
                        let mut ss = p.sellers().to_vec();
                        bs.sort();
                        ss.sort();
                        *p = ValueProfile::new(bs, ss, p.tick())?;
                    }
                    a == b
                };
                println!("matches treatment {to}: {same}");
            }
            Ok(ExitCode::SUCCESS)
        }
        ShiftCommand::Fuzz(args) => {
            let direction = match args.direction {
                DirectionArg::Down => Direction::Down,
                DirectionArg::Up => Direction::Up,
            };
            let mut rng = SimRng::new(args.seed);
            let (mut done, mut redrawn, mut broken) = (0, 0, 0);
            while done < args.cases {
                let nb = 1 + rng.below(9) as usize;
                let ns = 1 + rng.below(9) as usize;
                let b: Vec<u64> = (0..nb).map(|_| rng.inclusive(0, 100)).collect();
                let s: Vec<u64> = (0..ns).map(|_| rng.inclusive(0, 100)).collect();
                let profile = ValueProfile::from_ticks(&b, &s, TickSize::POUND)?;
                let weak = ce_set(&profile).weak;
                let p_star = Money(rng.inclusive(weak.lo.0, weak.hi.0));
                let (em, ep) = (Money(rng.inclusive(1, 5)), Money(rng.inclusive(1, 5)));
                let Ok((bm, sm)) = random_shift(&profile, p_star, em, ep, direction, &mut rng) else {
                    redrawn += 1;
                    continue;
                };
                done += 1;
                let shifted = apply_shift(&profile, &bm, &sm)?;
                if !check_preservation(&profile, &shifted)? {
                    broken += 1;
                    println!("moved equilibrium: {b:?} / {s:?} -> {:?} / {:?}", shifted.buyers(), shifted.sellers());
                }
            }
            println!("{direction}: {done} shifts, {broken} moved the equilibrium set, {redrawn} infeasible draws redrawn");
            Ok(if broken == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let config = match &args.config {
        None => Config::builtin(),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Config::parse_with_builtins(&text).with_context(|| format!("{}", p.display()))?
        }
    };
    let configs = config
        .sessions
        .iter()
        .map(|s| config.session_config(s, args.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let exec = args.parallel_sessions.map_or(Execution::Auto, Execution::from_threads);
    let logs = run_sessions(&configs, exec)?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    if logs.is_empty() {
        println!("no sessions configured; nothing written");
    }
    for log in &logs {
        let (offers, trades) = write_session(&args.out_dir, log)?;
        let n = log.trades().count();
        let rounds = log.rounds.len();
        println!(
            "session {} (seed {}): {rounds} rounds, {n} trades -> {}, {}",
            log.session,
            log.seed,
            offers.display(),
            trades.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_replicate(args: ReplicateArgs) -> Result<ExitCode> {
    let config = load_config(args.config.as_deref())?;
    let profile = &config.treatment(&args.treatment)?.profile;
    let opts = ZiOptions {
        offers: args.offers,
        tick: TickSize::new(args.tick)?,
        improvement_rule: !args.no_improvement_rule,
        max_ask_pence: args.max_ask,
        seed: args.seed,
    };
    let r = replicate_zi(profile, &opts)?;
    println!("treatment {} on a {}p grid, seed {}", args.treatment, r.tick, args.seed);
    println!("offers: {}", r.offers);
    println!("trades: {}", r.trades);
    match r.mean_price {
        Some(m) => println!("mean price: {m:.4}"),
        None => println!("mean price: none (no trades)"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ce(a) => cmd_ce(a),
        Command::Shift(c) => cmd_shift(c),
        Command::Simulate(a) => cmd_simulate(a),
        Command::ReplicateZi(a) => cmd_replicate(a),
        Command::Analyze(a) => analyze::run(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
