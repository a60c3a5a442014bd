//! The move-selection constrained optimization problem and its complete solver.
//!
//! Variables are the piece kind and the target row and column. A move is a valid
//! assignment when the mover holds the piece (`HasPiece`), the square is empty
//! (`FreePosition`) and the move is not excluded (`Unmasked`). The objective scores the
//! state reached by playing the move, from the mover's point of view.
//!
//! The move space has at most 72 assignments, so the solver enumerates it: unary
//! constraints prune domains first, and only satisfying assignments are simulated and scored.

use thiserror::Error;

use crate::engine::{GameState, Move, Phase, PieceKind, Square, MOVE_SPACE};
use crate::heuristic::{score_state, HeuristicWeights, Score};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("no valid move satisfies the constraints")]
    NoValidMove,
    #[error("the solver only handles placement decisions")]
    NotPlacementPhase,
    #[error("m must be at least 1")]
    ZeroCount,
}

/// Set of excluded moves, as a bitset over [`Move::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MoveMask(u128);

impl MoveMask {
    pub fn empty() -> MoveMask {
        MoveMask(0)
    }

    pub fn insert(&mut self, mv: Move) {
        self.0 |= 1 << mv.index();
    }

    pub fn remove(&mut self, mv: Move) {
        self.0 &= !(1 << mv.index());
    }

    pub fn contains(&self, mv: Move) -> bool {
        self.0 & (1 << mv.index()) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: MoveMask) -> MoveMask {
        MoveMask(self.0 | other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = Move> + '_ {
        (0..MOVE_SPACE)
            .filter_map(Move::from_index)
            .filter(|m| self.contains(*m))
    }
}

impl FromIterator<Move> for MoveMask {
    fn from_iter<I: IntoIterator<Item = Move>>(iter: I) -> Self {
        let mut mask = MoveMask::empty();
        for mv in iter {
            mask.insert(mv);
        }
        mask
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredMove {
    pub mv: Move,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Every assignment reaching the maximum score, in enumeration order.
    pub best: Vec<ScoredMove>,
    /// Every valid assignment, by descending score; ties keep enumeration order.
    pub all: Vec<ScoredMove>,
}

/// The (V, D, C, f) instance for one state and mask.
#[derive(Debug, Clone, Copy)]
pub struct CopModel<'a> {
    state: &'a GameState,
    mask: MoveMask,
    weights: &'a HeuristicWeights,
}

impl<'a> CopModel<'a> {
    pub const PIECE_DOMAIN: [PieceKind; 2] = PieceKind::BOTH;
    pub const POSITION_DOMAIN: std::ops::RangeInclusive<u8> = 1..=6;

    pub fn new(
        state: &'a GameState,
        mask: MoveMask,
        weights: &'a HeuristicWeights,
    ) -> CopModel<'a> {
        CopModel {
            state,
            mask,
            weights,
        }
    }

    pub fn has_piece(&self, piece: PieceKind) -> bool {
        self.state.pool(self.state.to_move()).has(piece)
    }

    pub fn free_position(&self, row: u8, col: u8) -> bool {
        Square::new(row, col).is_some_and(|sq| self.state.board().is_free(sq))
    }

    pub fn unmasked(&self, piece: PieceKind, row: u8, col: u8) -> bool {
        Square::new(row, col).is_some_and(|sq| !self.mask.contains(Move::new(piece, sq)))
    }

    pub fn is_valid(&self, piece: PieceKind, row: u8, col: u8) -> bool {
        self.has_piece(piece) && self.free_position(row, col) && self.unmasked(piece, row, col)
    }

    /// f: the score of the state reached by the move, for the player making it.
    pub fn objective(&self, mv: Move) -> Score {
        let next = self.state.apply_move_resolved(mv);
        score_state(&next, self.state.to_move(), self.weights)
    }

    /// All satisfying assignments: row-major squares, Small before Large.
    pub fn assignments(&self) -> Vec<Move> {
        let mut out = Vec::with_capacity(MOVE_SPACE);
        self.for_each_assignment(|mv| out.push(mv));
        out
    }

    fn for_each_assignment(&self, mut visit: impl FnMut(Move)) {
        if self.state.phase() != Phase::Placement || self.state.is_terminal() {
            return;
        }
        // HasPiece only involves v_p: filter its domain once.
        let pieces: [Option<PieceKind>; 2] =
            Self::PIECE_DOMAIN.map(|p| self.has_piece(p).then_some(p));
        if pieces.iter().all(Option::is_none) {
            return;
        }
        for row in Self::POSITION_DOMAIN {
            for col in Self::POSITION_DOMAIN {
                if !self.free_position(row, col) {
                    continue;
                }
                let at = Square::new(row, col).expect("domain is on the board");
                for piece in pieces.iter().flatten() {
                    let mv = Move::new(*piece, at);
                    if !self.mask.contains(mv) {
                        visit(mv);
                    }
                }
            }
        }
    }

    pub fn solve(&self) -> Result<Solution, SolverError> {
        self.check_phase()?;
        let mut all = Vec::with_capacity(MOVE_SPACE);
        self.for_each_assignment(|mv| {
            all.push(ScoredMove {
                mv,
                score: self.objective(mv),
            })
        });
        if all.is_empty() {
            return Err(SolverError::NoValidMove);
        }
        all.sort_by(|a, b| b.score.value().total_cmp(&a.score.value()));
        let top = all[0].score;
        let best = all.iter().take_while(|s| s.score == top).copied().collect();
        Ok(Solution { best, all })
    }

    /// Fills `best` with the maximizing moves and returns their score, without keeping the
    /// full ranking.
    pub(crate) fn solve_best_into(&self, best: &mut Vec<Move>) -> Result<Score, SolverError> {
        self.check_phase()?;
        best.clear();
        let mut top = f64::NEG_INFINITY;
        self.for_each_assignment(|mv| {
            let s = self.objective(mv).value();
            if s > top {
                top = s;
                best.clear();
                best.push(mv);
            } else if s == top {
                best.push(mv);
            }
        });
        if best.is_empty() {
            Err(SolverError::NoValidMove)
        } else {
            Ok(Score::new(top))
        }
    }

    fn check_phase(&self) -> Result<(), SolverError> {
        if self.state.phase() != Phase::Placement || self.state.is_terminal() {
            Err(SolverError::NotPlacementPhase)
        } else {
            Ok(())
        }
    }
}

pub fn valid_assignments(state: &GameState, mask: &MoveMask) -> Vec<Move> {
    let weights = HeuristicWeights::default();
    CopModel::new(state, *mask, &weights).assignments()
}

pub fn solve_all_best(
    state: &GameState,
    mask: &MoveMask,
    weights: &HeuristicWeights,
) -> Result<Solution, SolverError> {
    CopModel::new(state, *mask, weights).solve()
}

/// The `m` highest-scoring moves (fewer if fewer are valid).
pub fn solve_top_m(
    state: &GameState,
    m: usize,
    weights: &HeuristicWeights,
) -> Result<Vec<ScoredMove>, SolverError> {
    if m == 0 {
        return Err(SolverError::ZeroCount);
    }
    let mut all = solve_all_best(state, &MoveMask::empty(), weights)?.all;
    all.truncate(m);
    Ok(all)
}
