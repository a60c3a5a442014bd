//! UCT search with optional solver injections, plus the baseline agents.
//!
//! Three injections can be switched on independently:
//!
//! * **S** (selection): the solver pre-selects the `m` best root moves; the other root
//!   moves are masked and never visited.
//! * **E** (expansion): the expanded move is drawn uniformly among the solver's optima over
//!   the not-yet-expanded moves instead of among all of them.
//! * **P** (playout): playouts follow the solver's optima for at most `k` moves and return
//!   the discounted mean `(1/n) * sum(d^i * f(a_i))` instead of a random game's outcome.
//!
//! With all three off the search is plain UCT with random playouts.
//!
//! Node statistics are kept from the point of view of the player who made the move leading
//! to the node, so every parent maximizes its children's mean.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::engine::{GameState, Move, Phase, PieceKind, Player, Square, PLY_CAP};
use crate::heuristic::{terminal_score, HeuristicWeights};
use crate::solver::{solve_all_best, solve_top_m, CopModel, MoveMask, SolverError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("the game is over")]
    GameOver,
    #[error("a removal or graduation decision is pending")]
    DecisionPending,
    #[error("no legal move")]
    NoLegalMove,
    #[error("invalid search parameters: {0}")]
    InvalidParams(String),
    #[error("unknown agent kind {0:?} (expected vanilla, heuristic or mcts+[S][E][P])")]
    UnknownAgent(String),
    #[error("node is fully expanded")]
    FullyExpanded,
    #[error("playout started from a finished game")]
    TerminalPlayout,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// How long one move decision may search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Budget {
    /// Wall-clock milliseconds per move.
    Ms(u64),
    /// Fixed number of search iterations per move; fully reproducible.
    Iters(u32),
}

impl Budget {
    pub fn is_positive(&self) -> bool {
        match *self {
            Budget::Ms(ms) => ms > 0,
            Budget::Iters(n) => n > 0,
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Ms(ms) => write!(f, "{ms} ms/move"),
            Budget::Iters(n) => write!(f, "{n} iterations/move"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchParams {
    /// Playout length cap.
    pub k: u32,
    /// Root moves kept by pre-selection.
    pub m: usize,
    /// Playout discount factor, in (0, 1].
    pub discount: f64,
    pub c_explore: f64,
    pub budget: Budget,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            k: 20,
            m: 5,
            discount: 0.9,
            c_explore: std::f64::consts::SQRT_2,
            budget: Budget::Ms(1000),
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<(), SearchError> {
        let err = |msg: &str| Err(SearchError::InvalidParams(msg.to_string()));
        if self.k < 1 {
            return err("k must be at least 1");
        }
        if self.m < 1 {
            return err("m must be at least 1");
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return err("discount must lie in (0, 1]");
        }
        if !(self.c_explore.is_finite() && self.c_explore >= 0.0) {
            return err("c_explore must be finite and non-negative");
        }
        if !self.budget.is_positive() {
            return err("budget must be positive");
        }
        Ok(())
    }
}

/// Which search steps call the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Injections {
    pub selection: bool,
    pub expansion: bool,
    pub playout: bool,
}

impl Injections {
    pub const NONE: Injections = Injections {
        selection: false,
        expansion: false,
        playout: false,
    };
    pub const ALL: Injections = Injections {
        selection: true,
        expansion: true,
        playout: true,
    };

    /// Parses a subset of the letters `S`, `E`, `P`.
    pub fn from_letters(letters: &str) -> Option<Injections> {
        let mut inj = Injections::NONE;
        for ch in letters.chars() {
            let flag = match ch.to_ascii_uppercase() {
                'S' => &mut inj.selection,
                'E' => &mut inj.expansion,
                'P' => &mut inj.playout,
                _ => return None,
            };
            if *flag {
                return None;
            }
            *flag = true;
        }
        Some(inj)
    }

    pub fn letters(&self) -> String {
        let mut s = String::new();
        if self.selection {
            s.push('S');
        }
        if self.expansion {
            s.push('E');
        }
        if self.playout {
            s.push('P');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    VanillaMcts,
    HeuristicsOnly,
    MctsPlus(Injections),
}

impl AgentKind {
    /// The full method: all three injections.
    pub const MCTS_CO: AgentKind = AgentKind::MctsPlus(Injections::ALL);

    fn injections(&self) -> Injections {
        match self {
            AgentKind::MctsPlus(inj) => *inj,
            _ => Injections::NONE,
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentKind::VanillaMcts => f.write_str("vanilla"),
            AgentKind::HeuristicsOnly => f.write_str("heuristic"),
            AgentKind::MctsPlus(inj) => write!(f, "mcts+{}", inj.letters()),
        }
    }
}

impl FromStr for AgentKind {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "vanilla" | "mcts" => return Ok(AgentKind::VanillaMcts),
            "heuristic" | "heuristics" => return Ok(AgentKind::HeuristicsOnly),
            "mcts-co" => return Ok(AgentKind::MCTS_CO),
            _ => {}
        }
        lower
            .strip_prefix("mcts+")
            .and_then(|rest| Injections::from_letters(rest.trim()))
            .map(AgentKind::MctsPlus)
            .ok_or_else(|| SearchError::UnknownAgent(s.to_string()))
    }
}

impl Serialize for AgentKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AgentKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub kind: AgentKind,
    #[serde(default)]
    pub params: SearchParams,
    #[serde(default)]
    pub weights: HeuristicWeights,
    #[serde(default)]
    pub seed: u64,
}

impl AgentConfig {
    pub fn new(kind: AgentKind) -> AgentConfig {
        AgentConfig {
            kind,
            params: SearchParams::default(),
            weights: HeuristicWeights::default(),
            seed: 0,
        }
    }

    pub fn with_budget(mut self, budget: Budget) -> AgentConfig {
        self.params.budget = budget;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> AgentConfig {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        self.params.validate()?;
        self.weights
            .validate()
            .map_err(|e| SearchError::InvalidParams(e.to_string()))
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct SearchNode {
    /// Move from the parent; `None` at the root.
    pub mv: Option<Move>,
    /// Player who made `mv`; statistics are from this player's point of view.
    pub mover: Player,
    pub state: GameState,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Moves already expanded into children.
    pub expanded: MoveMask,
    pub visits: u32,
    pub score_sum: f64,
    /// Moves this node may expand into.
    candidates: u32,
}

impl SearchNode {
    pub fn is_terminal(&self) -> bool {
        self.state.is_terminal()
    }

    pub fn mean(&self) -> Option<f64> {
        (self.visits > 0).then(|| self.score_sum / self.visits as f64)
    }

    pub fn has_unexpanded(&self) -> bool {
        (self.children.len() as u32) < self.candidates
    }
}

/// A search tree rooted at one decision. Masked root moves are never expanded.
#[derive(Debug, Clone)]
pub struct SearchTree {
    nodes: Vec<SearchNode>,
    root_mask: MoveMask,
}

pub const ROOT: NodeId = 0;

impl SearchTree {
    pub fn new(state: GameState, root_mask: MoveMask) -> SearchTree {
        let mut candidates = state.legal_move_count() as u32;
        if let Ok(legal) = state.legal_moves() {
            candidates -= legal.iter().filter(|m| root_mask.contains(**m)).count() as u32;
        }
        SearchTree {
            nodes: vec![SearchNode {
                mv: None,
                mover: state.to_move().opponent(),
                state,
                parent: None,
                children: Vec::new(),
                expanded: MoveMask::empty(),
                visits: 0,
                score_sum: 0.0,
                candidates,
            }],
            root_mask,
        }
    }

    pub fn node(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> &SearchNode {
        &self.nodes[ROOT]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root_mask(&self) -> MoveMask {
        self.root_mask
    }

    /// Moves excluded when expanding `id`: its existing children, plus the root mask at the root.
    pub fn expansion_mask(&self, id: NodeId) -> MoveMask {
        let node = &self.nodes[id];
        if id == ROOT {
            node.expanded.union(self.root_mask)
        } else {
            node.expanded
        }
    }

    /// Descends from the root by UCB1 until reaching a terminal node or one with unexpanded
    /// moves. Returns the path, root first.
    pub fn select(&self, c_explore: f64) -> Vec<NodeId> {
        let mut path = vec![ROOT];
        let mut id = ROOT;
        loop {
            let node = &self.nodes[id];
            if node.is_terminal() || node.has_unexpanded() || node.children.is_empty() {
                return path;
            }
            id = self.uct_child(id, c_explore);
            path.push(id);
        }
    }

    /// UCB1 argmax over the children of `id`; unvisited children come first. Ties keep the
    /// earliest child.
    pub fn uct_child(&self, id: NodeId, c_explore: f64) -> NodeId {
        let parent = &self.nodes[id];
        let log_n = (parent.visits.max(1) as f64).ln();
        let mut best = parent.children[0];
        let mut best_value = f64::NEG_INFINITY;
        for &c in &parent.children {
            let child = &self.nodes[c];
            let value = match child.mean() {
                None => f64::INFINITY,
                Some(mean) => mean + c_explore * (log_n / child.visits as f64).sqrt(),
            };
            if value > best_value {
                best = c;
                best_value = value;
            }
        }
        best
    }

    /// Adds the child reached by `mv` from `parent`; decisions the move opens are resolved
    /// with the border heuristic.
    pub fn add_child(&mut self, parent: NodeId, mv: Move) -> NodeId {
        let p = &self.nodes[parent];
        let state = p.state.apply_move_resolved(mv);
        let mover = p.state.to_move();
        let id = self.nodes.len();
        self.nodes.push(SearchNode {
            mv: Some(mv),
            mover,
            state,
            parent: Some(parent),
            children: Vec::new(),
            expanded: MoveMask::empty(),
            visits: 0,
            score_sum: 0.0,
            candidates: state.legal_move_count() as u32,
        });
        let p = &mut self.nodes[parent];
        p.children.push(id);
        p.expanded.insert(mv);
        id
    }

    /// Adds `reward`, given from `perspective`'s point of view, to every node from `leaf` up
    /// to the root, negated at nodes whose mover is the other player.
    pub fn backpropagate(&mut self, leaf: NodeId, reward: f64, perspective: Player) {
        let mut cur = Some(leaf);
        while let Some(id) = cur {
            let node = &mut self.nodes[id];
            node.visits += 1;
            node.score_sum += if node.mover == perspective {
                reward
            } else {
                -reward
            };
            cur = node.parent;
        }
    }

    /// Root candidates with at least one visit that share the highest mean.
    pub fn best_ratio(&self, candidates: &[Move]) -> Vec<Move> {
        let mut best = Vec::new();
        let mut top = f64::NEG_INFINITY;
        for &c in &self.root().children {
            let child = &self.nodes[c];
            let (Some(mv), Some(mean)) = (child.mv, child.mean()) else {
                continue;
            };
            if !candidates.contains(&mv) {
                continue;
            }
            if mean > top {
                top = mean;
                best.clear();
                best.push(mv);
            } else if mean == top {
                best.push(mv);
            }
        }
        best
    }

    /// Checks that every path spells a legal move sequence from the root state.
    pub fn replay_check(&self) -> bool {
        self.nodes.iter().enumerate().skip(1).all(|(id, node)| {
            let parent = &self.nodes[node.parent.expect("non-root has a parent")];
            let mv = node.mv.expect("non-root has a move");
            parent.children.contains(&id)
                && parent.state.apply_move_auto(mv).ok() == Some(node.state)
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SearchStats {
    pub iterations: u32,
    pub nodes: usize,
    pub solver_calls: u64,
    /// Solver calls whose optimum was shared by more than one move.
    pub solver_ties: u64,
    pub elapsed: Duration,
}

/// Draws a uniformly random legal move without building the move list.
fn random_legal_move(state: &GameState, rng: &mut ChaCha8Rng) -> Option<Move> {
    let pool = state.pool(state.to_move());
    let kinds: Vec<PieceKind> = PieceKind::BOTH
        .into_iter()
        .filter(|k| pool.has(*k))
        .collect();
    let free = state.board().free();
    let n = free.count_ones() as usize * kinds.len();
    if n == 0 {
        return None;
    }
    let pick = rng.gen_range(0..n);
    let at = Square::iter_mask(free).nth(pick / kinds.len())?;
    Some(Move::new(kinds[pick % kinds.len()], at))
}

/// Per-search scratch and counters shared by expansion and playouts.
struct Worker<'a> {
    config: &'a AgentConfig,
    rng: &'a mut ChaCha8Rng,
    best: Vec<Move>,
    stats: SearchStats,
}

impl Worker<'_> {
    fn solver_best(&mut self, state: &GameState, mask: MoveMask) -> Result<f64, SearchError> {
        let top =
            CopModel::new(state, mask, &self.config.weights).solve_best_into(&mut self.best)?;
        self.stats.solver_calls += 1;
        if self.best.len() > 1 {
            self.stats.solver_ties += 1;
        }
        Ok(top.value())
    }

    fn expand(&mut self, tree: &mut SearchTree, id: NodeId) -> Result<NodeId, SearchError> {
        let node = tree.node(id);
        if node.is_terminal() {
            return Err(SearchError::GameOver);
        }
        if !node.has_unexpanded() {
            return Err(SearchError::FullyExpanded);
        }
        let mask = tree.expansion_mask(id);
        let state = node.state;
        let mv = if self.config.kind.injections().expansion {
            self.solver_best(&state, mask)?;
            *self.best.choose(self.rng).expect("solver returned optima")
        } else {
            let open = CopModel::new(&state, mask, &self.config.weights).assignments();
            *open.choose(self.rng).ok_or(SearchError::FullyExpanded)?
        };
        Ok(tree.add_child(id, mv))
    }

    fn playout(&mut self, state: &GameState, perspective: Player) -> Result<f64, SearchError> {
        if state.is_terminal() {
            return Err(SearchError::TerminalPlayout);
        }
        if self.config.kind.injections().playout {
            self.solver_playout(state, perspective)
        } else {
            Ok(self.random_playout(state, perspective))
        }
    }

    fn solver_playout(
        &mut self,
        state: &GameState,
        perspective: Player,
    ) -> Result<f64, SearchError> {
        let params = &self.config.params;
        let mut gs = *state;
        let mut iterations = 0u32;
        let mut score = 0.0;
        let mut weight = 1.0;
        while !gs.is_terminal() && iterations < params.k {
            let top = self.solver_best(&gs, MoveMask::empty())?;
            let mv = *self.best.choose(self.rng).expect("solver returned optima");
            let mover = gs.to_move();
            gs = gs.apply_move_resolved(mv);
            // The solver's value is the mover's; the objective is antisymmetric.
            let value = if mover == perspective { top } else { -top };
            weight *= params.discount;
            if gs.is_terminal() {
                score += value;
            } else {
                score += weight * value;
            }
            iterations += 1;
        }
        Ok(score / iterations as f64)
    }

    fn random_playout(&mut self, state: &GameState, perspective: Player) -> f64 {
        let mut gs = *state;
        for _ in 0..PLY_CAP {
            if let Some(winner) = gs.game_result() {
                return if winner == perspective { 1.0 } else { -1.0 };
            }
            let mv = random_legal_move(&gs, self.rng).expect("placement phase has a legal move");
            gs = gs.apply_move_resolved(mv);
        }
        match gs.game_result() {
            Some(w) if w == perspective => 1.0,
            Some(_) => -1.0,
            None => 0.0,
        }
    }

    fn iterate(&mut self, tree: &mut SearchTree) -> Result<(), SearchError> {
        let c = self.config.params.c_explore;
        let selected = *tree.select(c).last().expect("path starts at the root");
        let node = tree.node(selected);
        if node.is_terminal() {
            let reward = terminal_score(&node.state, node.mover)
                .expect("terminal")
                .value();
            let mover = node.mover;
            tree.backpropagate(selected, reward, mover);
            return Ok(());
        }
        let child = self.expand(tree, selected)?;
        let node = tree.node(child);
        let (state, mover) = (node.state, node.mover);
        let reward = match terminal_score(&state, mover) {
            Ok(s) => s.value(),
            Err(_) => self.playout(&state, mover)?,
        };
        tree.backpropagate(child, reward, mover);
        Ok(())
    }
}

/// A configured agent with its own random stream; reuse it across the moves of a game.
#[derive(Debug, Clone)]
pub struct Agent {
    config: AgentConfig,
    rng: ChaCha8Rng,
    last_stats: SearchStats,
}

impl Agent {
    pub fn new(config: AgentConfig) -> Result<Agent, SearchError> {
        config.validate()?;
        Ok(Agent {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            last_stats: SearchStats::default(),
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn last_stats(&self) -> SearchStats {
        self.last_stats
    }

    pub fn choose_move(&mut self, state: &GameState) -> Result<Move, SearchError> {
        self.choose_move_with_tree(state).map(|(mv, _)| mv)
    }

    /// Like [`Agent::choose_move`], also returning the search tree (absent for agents that
    /// do not search or when only one move is legal).
    pub fn choose_move_with_tree(
        &mut self,
        state: &GameState,
    ) -> Result<(Move, Option<SearchTree>), SearchError> {
        if state.is_terminal() {
            return Err(SearchError::GameOver);
        }
        if state.phase() != Phase::Placement {
            return Err(SearchError::DecisionPending);
        }
        let legal = state.legal_moves().map_err(|_| SearchError::NoLegalMove)?;
        self.last_stats = SearchStats::default();
        match legal.len() {
            0 => return Err(SearchError::NoLegalMove),
            1 => return Ok((legal[0], None)),
            _ => {}
        }
        if self.config.kind == AgentKind::HeuristicsOnly {
            let best = solve_all_best(state, &MoveMask::empty(), &self.config.weights)?.best;
            self.last_stats.solver_calls = 1;
            self.last_stats.solver_ties = (best.len() > 1) as u64;
            let pick = best.choose(&mut self.rng).expect("non-empty");
            return Ok((pick.mv, None));
        }
        self.search(state, legal).map(|(mv, tree)| (mv, Some(tree)))
    }

    fn search(
        &mut self,
        state: &GameState,
        legal: Vec<Move>,
    ) -> Result<(Move, SearchTree), SearchError> {
        let started = Instant::now();
        let config = self.config;
        let params = config.params;
        let preselected_scored = if config.kind.injections().selection {
            Some(solve_top_m(state, params.m, &config.weights)?)
        } else {
            None
        };
        let preselected: Vec<Move> = match &preselected_scored {
            Some(top) => top.iter().map(|s| s.mv).collect(),
            None => legal.clone(),
        };
        let root_mask: MoveMask = legal
            .iter()
            .filter(|m| !preselected.contains(m))
            .copied()
            .collect();
        let mut tree = SearchTree::new(*state, root_mask);

        let mut worker = Worker {
            config: &config,
            rng: &mut self.rng,
            best: Vec::with_capacity(72),
            stats: SearchStats::default(),
        };
        if preselected_scored.is_some() {
            worker.stats.solver_calls += 1;
        }
        let deadline = match params.budget {
            Budget::Ms(ms) => Some(started + Duration::from_millis(ms)),
            Budget::Iters(_) => None,
        };
        let mut iterations = 0u32;
        loop {
            worker.iterate(&mut tree)?;
            iterations += 1;
            let done = match params.budget {
                Budget::Iters(n) => iterations >= n,
                Budget::Ms(_) => Instant::now() >= deadline.expect("time budget"),
            };
            if done {
                break;
            }
        }

        let best = tree.best_ratio(&preselected);
        let mv = match best.choose(worker.rng) {
            Some(mv) => *mv,
            None => match &preselected_scored {
                Some(top) => top[0].mv,
                None => solve_top_m(state, 1, &config.weights)?[0].mv,
            },
        };
        let mut stats = worker.stats;
        stats.iterations = iterations;
        stats.nodes = tree.len();
        stats.elapsed = started.elapsed();
        self.last_stats = stats;
        Ok((mv, tree))
    }
}

/// One-shot move choice with a fresh agent seeded from `config.seed`.
pub fn choose_move(state: &GameState, config: &AgentConfig) -> Result<Move, SearchError> {
    Agent::new(*config)?.choose_move(state)
}

/// One playout from `state`, rewarded from `perspective`'s point of view.
pub fn playout(
    state: &GameState,
    perspective: Player,
    config: &AgentConfig,
    rng: &mut ChaCha8Rng,
) -> Result<f64, SearchError> {
    let mut worker = Worker {
        config,
        rng,
        best: Vec::with_capacity(72),
        stats: SearchStats::default(),
    };
    worker.playout(state, perspective)
}

/// Expands one child of `id` according to the agent's expansion policy.
pub fn expand(
    tree: &mut SearchTree,
    id: NodeId,
    config: &AgentConfig,
    rng: &mut ChaCha8Rng,
) -> Result<NodeId, SearchError> {
    let mut worker = Worker {
        config,
        rng,
        best: Vec::with_capacity(72),
        stats: SearchStats::default(),
    };
    worker.expand(tree, id)
}
