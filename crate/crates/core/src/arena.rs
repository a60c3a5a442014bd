//! Head-to-head series between two agent configurations, and their result tables.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{border_choice, GameState, Phase, Player, PLY_CAP};
use crate::record::{Event, GameRecord};
use crate::search::{Agent, AgentConfig, Budget, SearchError};

#[derive(Debug, Error)]
pub enum ArenaError {
    #[error("game {game}: {source}")]
    Agent { game: usize, source: SearchError },
    #[error("invalid match: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeatPolicy {
    /// A plays first in even-numbered games, second in odd ones.
    #[default]
    Alternate,
    /// A plays first in every game.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchSpec {
    pub agent_a: AgentConfig,
    pub agent_b: AgentConfig,
    pub games: usize,
    pub seats: SeatPolicy,
    pub base_seed: u64,
    /// Overrides both agents' budgets when set.
    pub budget: Option<Budget>,
    /// Games played concurrently.
    pub jobs: usize,
}

impl MatchSpec {
    pub fn new(agent_a: AgentConfig, agent_b: AgentConfig, games: usize) -> MatchSpec {
        MatchSpec {
            agent_a,
            agent_b,
            games,
            seats: SeatPolicy::Alternate,
            base_seed: 0,
            budget: None,
            jobs: 1,
        }
    }

    pub fn a_seat(&self, game: usize) -> Player {
        match self.seats {
            SeatPolicy::Alternate if game % 2 == 1 => Player::Two,
            _ => Player::One,
        }
    }

    pub fn game_seed(&self, game: usize) -> u64 {
        self.base_seed.wrapping_add(game as u64)
    }

    /// The configurations seated as (P1, P2) in `game`, with per-game agent seeds.
    pub fn seating(&self, game: usize) -> (AgentConfig, AgentConfig) {
        let mut a = self.agent_a;
        let mut b = self.agent_b;
        if let Some(budget) = self.budget {
            a.params.budget = budget;
            b.params.budget = budget;
        }
        let seed = self.game_seed(game);
        let (mut p1, mut p2) = match self.a_seat(game) {
            Player::One => (a, b),
            Player::Two => (b, a),
        };
        p1.seed = seat_seed(seed, Player::One);
        p2.seed = seat_seed(seed, Player::Two);
        (p1, p2)
    }

    pub fn validate(&self) -> Result<(), ArenaError> {
        if self.games == 0 {
            return Err(ArenaError::InvalidSpec("games must be at least 1".into()));
        }
        if self.jobs == 0 {
            return Err(ArenaError::InvalidSpec("jobs must be at least 1".into()));
        }
        for (name, cfg) in [("A", self.agent_a), ("B", self.agent_b)] {
            let mut cfg = cfg;
            if let Some(budget) = self.budget {
                cfg.params.budget = budget;
            }
            cfg.validate()
                .map_err(|e| ArenaError::InvalidSpec(format!("agent {name}: {e}")))?;
        }
        Ok(())
    }
}

/// splitmix64 finalizer over the game seed and seat, so the two seats draw unrelated streams.
pub fn seat_seed(game_seed: u64, seat: Player) -> u64 {
    let mut z = game_seed
        .wrapping_mul(2)
        .wrapping_add(seat.index() as u64)
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-seat move timing of one game.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MoveTimes {
    pub moves: u32,
    pub total: Duration,
    pub max: Duration,
}

impl MoveTimes {
    fn add(&mut self, d: Duration) {
        self.moves += 1;
        self.total += d;
        self.max = self.max.max(d);
    }

    fn merge(&mut self, other: &MoveTimes) {
        self.moves += other.moves;
        self.total += other.total;
        self.max = self.max.max(other.max);
    }

    pub fn mean(&self) -> Duration {
        if self.moves == 0 {
            Duration::ZERO
        } else {
            self.total / self.moves
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayedGame {
    pub record: GameRecord,
    /// Indexed by seat.
    pub times: [MoveTimes; 2],
}

/// Plays one game. Removal and graduation decisions are resolved by [`border_choice`]. A game
/// reaching the ply cap is scored as a loss for the player to move and flagged as an anomaly.
pub fn play_game(p1: AgentConfig, p2: AgentConfig, seed: u64) -> Result<PlayedGame, SearchError> {
    let mut agents = [Agent::new(p1)?, Agent::new(p2)?];
    let mut record = GameRecord::new(seed, Some(p1), Some(p2));
    let mut times = [MoveTimes::default(); 2];
    let mut state = GameState::new();
    while !state.is_terminal() {
        if state.phase() != Phase::Placement {
            let choice = border_choice(&state.pending_choices(), state.board());
            state = state
                .resolve_decision(choice)
                .expect("border_choice picks a pending choice");
            record.events.push(Event::Decide(choice));
            continue;
        }
        if state.ply() >= PLY_CAP {
            record.anomaly = Some(format!("ply cap {PLY_CAP} reached"));
            record.winner = Some(state.to_move().opponent());
            break;
        }
        let seat = state.to_move().index();
        let started = Instant::now();
        let mv = agents[seat].choose_move(&state)?;
        times[seat].add(started.elapsed());
        state = state.apply_move(mv).expect("agents return legal moves");
        record.events.push(Event::Place(mv));
    }
    if record.anomaly.is_none() {
        record.winner = state.game_result();
    }
    record.plies = state.ply();
    Ok(PlayedGame { record, times })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub label_a: String,
    pub label_b: String,
    pub budget: Option<Budget>,
    pub games: usize,
    /// Games that finished; below `games` only when the series aborted.
    pub completed: usize,
    pub a_wins_as_p1: u32,
    pub a_wins_as_p2: u32,
    pub b_wins_as_p1: u32,
    pub b_wins_as_p2: u32,
    /// Indices of games stopped by the ply cap.
    pub anomalies: Vec<usize>,
    /// Set when a game failed; the counts then cover the completed games only.
    pub aborted: Option<String>,
    #[serde(skip)]
    pub records: Vec<GameRecord>,
    /// Indexed by agent (A, B). Not part of the reproducible outcome.
    #[serde(skip)]
    pub times: [MoveTimes; 2],
    #[serde(skip)]
    pub elapsed: Duration,
}

impl MatchResult {
    pub fn a_wins(&self) -> u32 {
        self.a_wins_as_p1 + self.a_wins_as_p2
    }

    pub fn b_wins(&self) -> u32 {
        self.b_wins_as_p1 + self.b_wins_as_p2
    }

    pub fn p1_wins(&self) -> u32 {
        self.a_wins_as_p1 + self.b_wins_as_p1
    }

    pub fn p2_wins(&self) -> u32 {
        self.a_wins_as_p2 + self.b_wins_as_p2
    }

    pub fn a_win_rate(&self) -> f64 {
        let n = self.a_wins() + self.b_wins();
        if n == 0 {
            0.0
        } else {
            self.a_wins() as f64 / n as f64
        }
    }

    /// The outcome without timing: equal for two runs of the same fixed-iteration series.
    pub fn outcome(&self) -> (MatchResult, Vec<String>) {
        let mut bare = self.clone();
        bare.times = Default::default();
        bare.elapsed = Duration::ZERO;
        let texts = self.records.iter().map(GameRecord::to_json).collect();
        (bare, texts)
    }
}

/// Plays `spec.games` games, `spec.jobs` at a time. Game `i` uses seed `base_seed + i`, so
/// results do not depend on `jobs` under an iteration budget.
pub fn run_series(spec: &MatchSpec) -> Result<MatchResult, ArenaError> {
    run_series_with(spec, |_, _| {})
}

/// Like [`run_series`], calling `progress(completed, game)` as games finish.
pub fn run_series_with(
    spec: &MatchSpec,
    progress: impl Fn(usize, &PlayedGame) + Sync,
) -> Result<MatchResult, ArenaError> {
    spec.validate()?;
    let started = Instant::now();
    let next = AtomicUsize::new(0);
    let done = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let slots: Mutex<Vec<Option<Result<PlayedGame, SearchError>>>> =
        Mutex::new(vec![None; spec.games]);
    std::thread::scope(|scope| {
        for _ in 0..spec.jobs.min(spec.games) {
            scope.spawn(|| loop {
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= spec.games {
                    break;
                }
                let (p1, p2) = spec.seating(i);
                let outcome = play_game(p1, p2, spec.game_seed(i));
                match &outcome {
                    Ok(game) => progress(done.fetch_add(1, Ordering::Relaxed) + 1, game),
                    Err(_) => stop.store(true, Ordering::Relaxed),
                }
                slots.lock().expect("no panics while holding the lock")[i] = Some(outcome);
            });
        }
    });

    let mut result = MatchResult {
        label_a: spec.agent_a.kind.to_string(),
        label_b: spec.agent_b.kind.to_string(),
        budget: spec.budget,
        games: spec.games,
        completed: 0,
        a_wins_as_p1: 0,
        a_wins_as_p2: 0,
        b_wins_as_p1: 0,
        b_wins_as_p2: 0,
        anomalies: Vec::new(),
        aborted: None,
        records: Vec::new(),
        times: Default::default(),
        elapsed: Duration::ZERO,
    };
    for (i, slot) in slots
        .into_inner()
        .expect("workers joined")
        .into_iter()
        .enumerate()
    {
        let game = match slot {
            None => continue,
            Some(Err(e)) => {
                if result.aborted.is_none() {
                    result.aborted = Some(ArenaError::Agent { game: i, source: e }.to_string());
                }
                continue;
            }
            Some(Ok(game)) => game,
        };
        let a_seat = spec.a_seat(i);
        let winner = game.record.winner.expect("finished games have a winner");
        match (winner == a_seat, winner) {
            (true, Player::One) => result.a_wins_as_p1 += 1,
            (true, Player::Two) => result.a_wins_as_p2 += 1,
            (false, Player::One) => result.b_wins_as_p1 += 1,
            (false, Player::Two) => result.b_wins_as_p2 += 1,
        }
        if game.record.anomaly.is_some() {
            result.anomalies.push(i);
        }
        result.times[0].merge(&game.times[a_seat.index()]);
        result.times[1].merge(&game.times[a_seat.opponent().index()]);
        result.records.push(game.record);
        result.completed += 1;
    }
    result.elapsed = started.elapsed();
    Ok(result)
}

/// One row of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub agent: String,
    pub opponent: String,
    pub games: usize,
    pub wins_as_p1: u32,
    pub wins_as_p2: u32,
    pub win_rate: f64,
    pub p1_wins: u32,
    pub p2_wins: u32,
    pub anomalies: usize,
}

impl From<&MatchResult> for TableRow {
    fn from(r: &MatchResult) -> TableRow {
        TableRow {
            agent: r.label_a.clone(),
            opponent: r.label_b.clone(),
            games: r.completed,
            wins_as_p1: r.a_wins_as_p1,
            wins_as_p2: r.a_wins_as_p2,
            win_rate: r.a_win_rate(),
            p1_wins: r.p1_wins(),
            p2_wins: r.p2_wins(),
            anomalies: r.anomalies.len(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub rows: Vec<TableRow>,
}

const HEADERS: [&str; 9] = [
    "agent",
    "opponent",
    "games",
    "wins_as_p1",
    "wins_as_p2",
    "win_rate",
    "p1_wins",
    "p2_wins",
    "anomalies",
];

impl Table {
    pub fn summarize<'a>(results: impl IntoIterator<Item = &'a MatchResult>) -> Table {
        Table {
            rows: results.into_iter().map(TableRow::from).collect(),
        }
    }

    fn cells(row: &TableRow) -> [String; 9] {
        [
            row.agent.clone(),
            row.opponent.clone(),
            row.games.to_string(),
            row.wins_as_p1.to_string(),
            row.wins_as_p2.to_string(),
            format!("{:.3}", row.win_rate),
            row.p1_wins.to_string(),
            row.p2_wins.to_string(),
            row.anomalies.to_string(),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut out = HEADERS.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&Self::cells(row).join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables always serialize")
    }

    /// Column-aligned text; text columns left-aligned, numbers right-aligned.
    pub fn to_text(&self) -> String {
        let body: Vec<[String; 9]> = self.rows.iter().map(Self::cells).collect();
        let mut widths = HEADERS.map(str::len);
        for cells in &body {
            for (w, c) in widths.iter_mut().zip(cells) {
                *w = (*w).max(c.len());
            }
        }
        let line = |cells: [&str; 9]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(i, (c, w))| {
                    if i < 2 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            parts.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(HEADERS);
        for cells in &body {
            out.push_str(&line(cells.each_ref().map(String::as_str)));
        }
        out
    }
}
