//! Python bindings. Moves and decisions cross the boundary in text notation
//! (`"S@c3"`, `"L@d4"`, `"R@a1-b1-c1"`, `"G@e5"`); players are 1 and 2.

use boop_core::arena::{run_series, MatchSpec};
use boop_core::engine::{self, DecisionChoice, Move, Phase, PieceKind, Player, Square};
use boop_core::heuristic::{self, HeuristicWeights};
use boop_core::search::{AgentConfig, AgentKind, Budget};
use boop_core::solver;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn player(n: u8) -> PyResult<Player> {
    match n {
        1 => Ok(Player::One),
        2 => Ok(Player::Two),
        _ => Err(PyValueError::new_err(format!(
            "player must be 1 or 2, got {n}"
        ))),
    }
}

fn player_number(p: Player) -> u8 {
    p.index() as u8 + 1
}

fn weights(py: Python<'_>, w: Option<&Bound<'_, PyDict>>) -> PyResult<HeuristicWeights> {
    let Some(w) = w else {
        return Ok(HeuristicWeights::default());
    };
    let text: String = py.import("json")?.call_method1("dumps", (w,))?.extract()?;
    let parsed: HeuristicWeights = serde_json::from_str(&text).map_err(value_error)?;
    parsed.validate().map_err(value_error)?;
    Ok(parsed)
}

fn budget(budget_ms: Option<u64>, iters: Option<u32>) -> PyResult<Option<Budget>> {
    match (budget_ms, iters) {
        (Some(_), Some(_)) => Err(PyValueError::new_err("give budget_ms or iters, not both")),
        (Some(ms), None) => Ok(Some(Budget::Ms(ms))),
        (None, Some(n)) => Ok(Some(Budget::Iters(n))),
        (None, None) => Ok(None),
    }
}

fn agent_config(
    py: Python<'_>,
    agent: &str,
    budget_ms: Option<u64>,
    iters: Option<u32>,
    seed: u64,
    w: Option<&Bound<'_, PyDict>>,
) -> PyResult<AgentConfig> {
    let kind: AgentKind = agent.parse().map_err(value_error)?;
    let mut cfg = AgentConfig::new(kind).with_seed(seed);
    if let Some(b) = budget(budget_ms, iters)? {
        cfg = cfg.with_budget(b);
    }
    cfg.weights = weights(py, w)?;
    cfg.validate().map_err(value_error)?;
    Ok(cfg)
}

/// Immutable game position; every transition returns a new state.
#[pyclass(name = "GameState", module = "boop", frozen)]
struct PyGameState {
    inner: engine::GameState,
}

#[pymethods]
impl PyGameState {
    #[new]
    fn new() -> Self {
        PyGameState {
            inner: engine::GameState::new(),
        }
    }

    #[getter]
    fn to_move(&self) -> u8 {
        player_number(self.inner.to_move())
    }

    #[getter]
    fn ply(&self) -> u32 {
        self.inner.ply()
    }

    /// `"placement"`, `"awaiting_removal"` or `"awaiting_graduation"`.
    #[getter]
    fn phase(&self) -> &'static str {
        match self.inner.phase() {
            Phase::Placement => "placement",
            Phase::AwaitingRemoval => "awaiting_removal",
            Phase::AwaitingGraduation => "awaiting_graduation",
        }
    }

    #[getter]
    fn winner(&self) -> Option<u8> {
        self.inner.game_result().map(player_number)
    }

    fn is_terminal(&self) -> bool {
        self.inner.is_terminal()
    }

    /// `(small, large)` pieces in the player's pool.
    fn pool(&self, player_no: u8) -> PyResult<(u8, u8)> {
        let pool = self.inner.pool(player(player_no)?);
        Ok((pool.small, pool.large))
    }

    /// `board()[r][c]` is the square at row `r + 1`, column `c + 1`: `"x"`/`"X"` for
    /// player 1, `"o"`/`"O"` for player 2, `None` when empty.
    fn board(&self) -> Vec<Vec<Option<&'static str>>> {
        (0..6)
            .map(|row| {
                (0..6)
                    .map(|col| {
                        let sq = Square::from_index(row * 6 + col).expect("on board");
                        self.inner.board().get(sq).map(|cell| match cell {
                            (Player::One, PieceKind::Small) => "x",
                            (Player::One, PieceKind::Large) => "X",
                            (Player::Two, PieceKind::Small) => "o",
                            (Player::Two, PieceKind::Large) => "O",
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// Empty unless the phase is placement.
    fn legal_moves(&self) -> Vec<String> {
        self.inner
            .legal_moves()
            .map(|moves| moves.iter().map(Move::to_string).collect())
            .unwrap_or_default()
    }

    fn pending_choices(&self) -> Vec<String> {
        self.inner
            .pending_choices()
            .iter()
            .map(DecisionChoice::to_string)
            .collect()
    }

    /// Places a piece; the result may await a removal or graduation decision.
    fn apply_move(&self, mv: &str) -> PyResult<Self> {
        let mv: Move = mv.parse().map_err(value_error)?;
        let inner = self.inner.apply_move(mv).map_err(value_error)?;
        Ok(PyGameState { inner })
    }

    /// Places a piece and settles any decision with the default border rule.
    fn apply_move_auto(&self, mv: &str) -> PyResult<Self> {
        let mv: Move = mv.parse().map_err(value_error)?;
        let inner = self.inner.apply_move_auto(mv).map_err(value_error)?;
        Ok(PyGameState { inner })
    }

    fn resolve_decision(&self, choice: &str) -> PyResult<Self> {
        let choice: DecisionChoice = choice.parse().map_err(value_error)?;
        let inner = self.inner.resolve_decision(choice).map_err(value_error)?;
        Ok(PyGameState { inner })
    }

    fn __str__(&self) -> String {
        self.inner.board().to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "GameState(ply={}, to_move={}, phase={:?}, winner={:?})",
            self.ply(),
            self.to_move(),
            self.phase(),
            self.winner()
        )
    }
}

/// Heuristic value of `state` for `player`, in [-1, 1].
#[pyfunction]
#[pyo3(signature = (state, player_no, weights=None))]
fn evaluate(
    py: Python<'_>,
    state: &PyGameState,
    player_no: u8,
    weights: Option<&Bound<'_, PyDict>>,
) -> PyResult<f64> {
    let w = self::weights(py, weights)?;
    let score = heuristic::evaluate(&state.inner, player(player_no)?, &w).map_err(value_error)?;
    Ok(score.value())
}

/// The `m` best placements for the player to move, as `(move, score)` pairs, best first.
#[pyfunction]
#[pyo3(signature = (state, m, weights=None))]
fn solve_top_m(
    py: Python<'_>,
    state: &PyGameState,
    m: usize,
    weights: Option<&Bound<'_, PyDict>>,
) -> PyResult<Vec<(String, f64)>> {
    let w = self::weights(py, weights)?;
    let top = solver::solve_top_m(&state.inner, m, &w).map_err(value_error)?;
    Ok(top
        .iter()
        .map(|s| (s.mv.to_string(), s.score.value()))
        .collect())
}

/// One move from a fresh agent, e.g. `agent="mcts+SEP"`, `"vanilla"`, `"heuristic"`.
#[pyfunction]
#[pyo3(signature = (state, agent="mcts+SEP", budget_ms=None, iters=None, seed=0, weights=None))]
fn choose_move(
    py: Python<'_>,
    state: &PyGameState,
    agent: &str,
    budget_ms: Option<u64>,
    iters: Option<u32>,
    seed: u64,
    weights: Option<&Bound<'_, PyDict>>,
) -> PyResult<String> {
    let cfg = agent_config(py, agent, budget_ms, iters, seed, weights)?;
    let inner = state.inner;
    py.detach(move || boop_core::search::choose_move(&inner, &cfg))
        .map(|mv| mv.to_string())
        .map_err(value_error)
}

/// Plays a series and returns its summary as a dict, with each game's record (a JSON
/// string) under `"records"`.
#[pyfunction]
#[pyo3(signature = (agent_a, agent_b, games, budget_ms=None, iters=None, seed=0, jobs=1, fixed_seats=false))]
#[allow(clippy::too_many_arguments)]
fn play_match<'py>(
    py: Python<'py>,
    agent_a: &str,
    agent_b: &str,
    games: usize,
    budget_ms: Option<u64>,
    iters: Option<u32>,
    seed: u64,
    jobs: usize,
    fixed_seats: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let a = agent_config(py, agent_a, None, None, 0, None)?;
    let b = agent_config(py, agent_b, None, None, 0, None)?;
    let mut spec = MatchSpec::new(a, b, games);
    spec.budget = budget(budget_ms, iters)?;
    spec.base_seed = seed;
    spec.jobs = jobs;
    if fixed_seats {
        spec.seats = boop_core::arena::SeatPolicy::Fixed;
    }
    let result = py.detach(move || run_series(&spec)).map_err(value_error)?;
    let (summary, records) = result.outcome();
    let text = serde_json::to_string(&summary).map_err(value_error)?;
    let out = py.import("json")?.call_method1("loads", (text,))?;
    out.set_item("records", records)?;
    Ok(out)
}

#[pymodule]
fn boop(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGameState>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(solve_top_m, m)?)?;
    m.add_function(wrap_pyfunction!(choose_move, m)?)?;
    m.add_function(wrap_pyfunction!(play_match, m)?)?;
    Ok(())
}
