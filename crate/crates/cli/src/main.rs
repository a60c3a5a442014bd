use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use boop_core::arena::{run_series_with, MatchResult, MatchSpec, SeatPolicy, Table};
use boop_core::config::MatchConfig;
use boop_core::record::GameRecord;
use boop_core::search::{AgentConfig, AgentKind, Budget};
use boop_service::SessionManager;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "boop",
    about = "Agent matches, replays and the play server for boop."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a series between two agents.
    Match(MatchArgs),
    /// Play an agent against itself.
    Mirror(MirrorArgs),
    /// Check a game record move by move and print the final position.
    Replay {
        file: PathBuf,
        /// Print the board after every event.
        #[arg(long)]
        verbose: bool,
    },
    /// Summarize saved series results.
    Table {
        /// `result.json` files written by `match` or `mirror`.
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Serve the HTTP play API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Directory for finished game records.
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args)]
struct SeriesArgs {
    #[arg(long)]
    games: Option<usize>,
    /// Wall-clock budget per move.
    #[arg(long, conflicts_with = "iters")]
    budget_ms: Option<u64>,
    /// Fixed iterations per move (reproducible).
    #[arg(long)]
    iters: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Games played concurrently.
    #[arg(long)]
    jobs: Option<usize>,
    /// A moves first in every game instead of alternating.
    #[arg(long)]
    fixed_seats: bool,
    /// Output directory for result.json, table.csv and game records.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML match file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct MatchArgs {
    /// Agent A: vanilla, heuristic, mcts+SEP, mcts+P, ...
    #[arg(long)]
    a: Option<AgentKind>,
    #[arg(long)]
    b: Option<AgentKind>,
    #[command(flatten)]
    series: SeriesArgs,
}

#[derive(Args)]
struct MirrorArgs {
    #[arg(long, default_value = "vanilla")]
    agent: AgentKind,
    #[command(flatten)]
    series: SeriesArgs,
}

fn build_spec(
    a: Option<AgentKind>,
    b: Option<AgentKind>,
    args: &SeriesArgs,
) -> Result<(MatchSpec, Option<PathBuf>)> {
    let (mut spec, mut out) = match &args.config {
        Some(path) => {
            let cfg = MatchConfig::load(path)?;
            (cfg.to_spec()?, cfg.out.clone())
        }
        None => {
            let mut spec = MatchSpec::new(
                AgentConfig::new(AgentKind::MCTS_CO),
                AgentConfig::new(AgentKind::VanillaMcts),
                50,
            );
            spec.budget = Some(Budget::Ms(250));
            (spec, None)
        }
    };
    if let Some(a) = a {
        spec.agent_a.kind = a;
    }
    if let Some(b) = b {
        spec.agent_b.kind = b;
    }
    if let Some(games) = args.games {
        spec.games = games;
    }
    if let Some(ms) = args.budget_ms {
        spec.budget = Some(Budget::Ms(ms));
    }
    if let Some(n) = args.iters {
        spec.budget = Some(Budget::Iters(n));
    }
    if let Some(seed) = args.seed {
        spec.base_seed = seed;
    }
    if let Some(jobs) = args.jobs {
        spec.jobs = jobs;
    }
    if args.fixed_seats {
        spec.seats = SeatPolicy::Fixed;
    }
    if args.out.is_some() {
        out = args.out.clone();
    }
    spec.validate()?;
    Ok((spec, out))
}

fn run(spec: &MatchSpec, out: Option<&Path>) -> Result<MatchResult> {
    eprintln!(
        "{} vs {}: {} games, {}",
        spec.agent_a.kind,
        spec.agent_b.kind,
        spec.games,
        spec.budget.unwrap_or(spec.agent_a.params.budget)
    );
    let result = run_series_with(spec, |done, game| {
        let r = &game.record;
        let winner = r.winner.map_or("-".to_string(), |w| w.to_string());
        eprintln!(
            "  game {done}/{}: {winner} wins after {} plies",
            spec.games, r.plies
        );
    })?;
    print!("{}", Table::summarize([&result]).to_text());
    let [ta, tb] = result.times;
    eprintln!(
        "mean move time: A {:?}, B {:?}; total {:?}",
        ta.mean(),
        tb.mean(),
        result.elapsed
    );
    if let Some(dir) = out {
        let games = dir.join("games");
        fs::create_dir_all(&games).with_context(|| format!("creating {}", games.display()))?;
        for (i, record) in result.records.iter().enumerate() {
            record.write(&games.join(format!("game-{i:04}.json")))?;
        }
        fs::write(
            dir.join("result.json"),
            serde_json::to_string_pretty(&result)? + "\n",
        )?;
        fs::write(dir.join("table.csv"), Table::summarize([&result]).to_csv())?;
        eprintln!("wrote {}", dir.display());
    }
    if let Some(reason) = &result.aborted {
        bail!("series aborted: {reason}");
    }
    Ok(result)
}

fn replay(file: &Path, verbose: bool) -> Result<()> {
    let record = GameRecord::read(file)?;
    if verbose {
        let mut state = boop_core::engine::GameState::new();
        for ev in &record.events {
            state = match ev {
                boop_core::record::Event::Place(m) => state.apply_move(*m),
                boop_core::record::Event::Decide(d) => state.resolve_decision(*d),
            }
            .map_err(|e| anyhow::anyhow!("{ev}: {e}"))?;
            println!("{ev}\n{}\n", state.board());
        }
    }
    let end = record.replay()?;
    println!("{}", end.board());
    match end.game_result().or(record.winner) {
        Some(w) => println!("{w} wins after {} plies", end.ply()),
        None => println!("unfinished after {} plies", end.ply()),
    }
    if let Some(a) = &record.anomaly {
        println!("anomaly: {a}");
    }
    Ok(())
}

fn table(files: &[PathBuf], format: Format) -> Result<()> {
    let mut results = Vec::new();
    for f in files {
        let text = fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
        let r: MatchResult =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", f.display()))?;
        results.push(r);
    }
    let t = Table::summarize(&results);
    match format {
        Format::Text => print!("{}", t.to_text()),
        Format::Csv => print!("{}", t.to_csv()),
        Format::Json => println!("{}", t.to_json()),
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Match(args) => {
            let (spec, out) = build_spec(args.a, args.b, &args.series)?;
            run(&spec, out.as_deref())?;
        }
        Command::Mirror(args) => {
            let (mut spec, out) = build_spec(Some(args.agent), Some(args.agent), &args.series)?;
            spec.agent_b = spec.agent_a;
            run(&spec, out.as_deref())?;
        }
        Command::Replay { file, verbose } => replay(&file, verbose)?,
        Command::Table { results, format } => table(&results, format)?,
        Command::Serve { addr, records } => {
            let manager = match records {
                Some(dir) => SessionManager::with_records_dir(dir),
                None => SessionManager::new(),
            };
            eprintln!("listening on http://{addr}");
            tokio::runtime::Runtime::new()?.block_on(boop_service::serve(addr, manager))?;
        }
    }
    Ok(())
}
