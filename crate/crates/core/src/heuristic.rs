//! Game-state scoring used as the objective of the move solver.
//!
//! The raw score is a weighted sum of differences (perspective minus opponent) between the
//! two players: pieces on the board, pieces in the center, pieces on the border, Large
//! pieces owned, and adjacent pairs / triples of own pieces split by kind composition.
//! Dividing by [`HeuristicWeights::normalizer`] maps it into `[-1, 1]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::LineMasks;
use crate::engine::{Board, GameState, PieceKind, Player, BORDER, CENTER, LINES};

/// Upper bound on adjacent pairs among 8 pieces (a 3x3 block minus a corner).
pub const MAX_PAIRS: u32 = 17;
/// Upper bound on 3-square windows covered by 8 pieces (a row of four over a 2x2 block).
pub const MAX_TRIPLES: u32 = 6;
const MAX_PIECE_DIFF: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeuristicError {
    #[error("evaluate called on a finished game; use terminal_score")]
    Terminal,
    #[error("terminal_score called on a game in progress")]
    NotTerminal,
    #[error("weight {0} is not finite")]
    NonFinite(&'static str),
    #[error("all weights are zero")]
    Degenerate,
}

/// Weights for a line term, by the kinds of the pieces forming it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionWeights {
    pub small: f64,
    pub mixed: f64,
    pub large: f64,
}

impl CompositionWeights {
    fn max_abs(&self) -> f64 {
        self.small.abs().max(self.mixed.abs()).max(self.large.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeuristicWeights {
    pub count: f64,
    pub center: f64,
    pub border: f64,
    pub large_owned: f64,
    pub align2: CompositionWeights,
    pub align3: CompositionWeights,
}

impl Default for HeuristicWeights {
    /// All defaults are dyadic rationals so that equal raw scores compare equal exactly.
    fn default() -> Self {
        HeuristicWeights {
            count: 1.0,
            center: 1.5,
            border: -0.5,
            large_owned: 6.0,
            align2: CompositionWeights {
                small: 1.0,
                mixed: 2.0,
                large: 8.0,
            },
            align3: CompositionWeights {
                small: 3.0,
                mixed: 5.0,
                large: 12.0,
            },
        }
    }
}

impl HeuristicWeights {
    pub fn validate(&self) -> Result<(), HeuristicError> {
        let named = [
            ("count", self.count),
            ("center", self.center),
            ("border", self.border),
            ("large_owned", self.large_owned),
            ("align2.small", self.align2.small),
            ("align2.mixed", self.align2.mixed),
            ("align2.large", self.align2.large),
            ("align3.small", self.align3.small),
            ("align3.mixed", self.align3.mixed),
            ("align3.large", self.align3.large),
        ];
        if let Some((name, _)) = named.iter().find(|(_, w)| !w.is_finite()) {
            return Err(HeuristicError::NonFinite(name));
        }
        if self.normalizer() == 0.0 {
            return Err(HeuristicError::Degenerate);
        }
        Ok(())
    }

    /// MAX: the sum of each term's largest possible magnitude, bounding `|raw|` from above.
    pub fn normalizer(&self) -> f64 {
        MAX_PIECE_DIFF
            * (self.count.abs() + self.center.abs() + self.border.abs() + self.large_owned.abs())
            + MAX_PAIRS as f64 * self.align2.max_abs()
            + MAX_TRIPLES as f64 * self.align3.max_abs()
    }
}

/// A normalized score in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Score(f64);

impl Score {
    pub const WIN: Score = Score(1.0);
    pub const LOSS: Score = Score(-1.0);

    pub fn new(value: f64) -> Score {
        Score(value.clamp(-1.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Line counts for one player, split by composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LineCounts {
    pub small: u32,
    pub mixed: u32,
    pub large: u32,
}

impl LineCounts {
    pub fn total(&self) -> u32 {
        self.small + self.mixed + self.large
    }
}

#[inline(always)]
fn pairs_in(bits: u64) -> u32 {
    let [h, v, d, a] = LINES;
    (bits & (bits >> h.shift) & h.pair_starts).count_ones()
        + (bits & (bits >> v.shift) & v.pair_starts).count_ones()
        + (bits & (bits >> d.shift) & d.pair_starts).count_ones()
        + (bits & (bits >> a.shift) & a.pair_starts).count_ones()
}

#[inline(always)]
fn triples_in(bits: u64) -> u32 {
    let [h, v, d, a] = LINES;
    let t = |l: LineMasks| bits & (bits >> l.shift) & (bits >> (2 * l.shift)) & l.triple_starts;
    t(h).count_ones() + t(v).count_ones() + t(d).count_ones() + t(a).count_ones()
}

#[inline(always)]
fn split(board: &Board, player: Player, count: impl Fn(u64) -> u32) -> LineCounts {
    let all = count(board.pieces(player));
    if all == 0 {
        return LineCounts::default();
    }
    let small = count(board.pieces_of(player, PieceKind::Small));
    let large = count(board.pieces_of(player, PieceKind::Large));
    LineCounts {
        small,
        mixed: all - small - large,
        large,
    }
}

/// Adjacent own pairs (horizontal, vertical, both diagonals) for `player`.
pub fn pair_counts(board: &Board, player: Player) -> LineCounts {
    split(board, player, pairs_in)
}

/// Three-in-a-row windows of own pieces for `player`.
pub fn triple_counts(board: &Board, player: Player) -> LineCounts {
    split(board, player, triples_in)
}

fn weighted(w: &CompositionWeights, c: LineCounts) -> f64 {
    w.small * c.small as f64 + w.mixed * c.mixed as f64 + w.large * c.large as f64
}

fn side_value(state: &GameState, player: Player, w: &HeuristicWeights) -> f64 {
    let b = state.board();
    let own = b.pieces(player);
    w.count * own.count_ones() as f64
        + w.center * (own & CENTER).count_ones() as f64
        + w.border * (own & BORDER).count_ones() as f64
        + w.large_owned * state.large_owned(player) as f64
        + weighted(&w.align2, pair_counts(b, player))
        + weighted(&w.align3, triple_counts(b, player))
}

/// Unnormalized score; antisymmetric in `perspective` by construction.
pub fn raw_score(state: &GameState, perspective: Player, weights: &HeuristicWeights) -> f64 {
    side_value(state, perspective, weights) - side_value(state, perspective.opponent(), weights)
}

/// Heuristic value of a non-terminal state from `perspective`.
pub fn evaluate(
    state: &GameState,
    perspective: Player,
    weights: &HeuristicWeights,
) -> Result<Score, HeuristicError> {
    if state.is_terminal() {
        return Err(HeuristicError::Terminal);
    }
    Ok(evaluate_unchecked(state, perspective, weights))
}

pub(crate) fn evaluate_unchecked(
    state: &GameState,
    perspective: Player,
    weights: &HeuristicWeights,
) -> Score {
    Score::new(raw_score(state, perspective, weights) / weights.normalizer())
}

/// +1 if `perspective` won, -1 otherwise.
pub fn terminal_score(state: &GameState, perspective: Player) -> Result<Score, HeuristicError> {
    match state.game_result() {
        Some(w) if w == perspective => Ok(Score::WIN),
        Some(_) => Ok(Score::LOSS),
        None => Err(HeuristicError::NotTerminal),
    }
}

/// Terminal score when the game is over, heuristic value otherwise.
pub(crate) fn score_state(
    state: &GameState,
    perspective: Player,
    weights: &HeuristicWeights,
) -> Score {
    match state.game_result() {
        Some(w) if w == perspective => Score::WIN,
        Some(_) => Score::LOSS,
        None => evaluate_unchecked(state, perspective, weights),
    }
}
