//! Rules of boop.: placement, pushes, alignment removal, promotion, graduation and victory.
//!
//! [`GameState`] is a small `Copy` value; every operation returns a new state.

mod board;
mod notation;

use std::fmt;

use thiserror::Error;

pub use board::{
    compute_boops, find_alignments, Board, PieceKind, Player, Square, BORDER, CENTER, FULL,
    PIECES_PER_PLAYER, SQUARES,
};
pub(crate) use board::{for_each_boop, LineMasks, LINES};
pub use notation::NotationError;

/// Hard cap on placements per game in harness contexts. Hitting it is an anomaly, not a draw.
pub const PLY_CAP: u32 = 1000;

/// Placing one piece of `piece` kind on `at`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub piece: PieceKind,
    pub at: Square,
}

/// Number of distinct (kind, square) pairs.
pub const MOVE_SPACE: usize = SQUARES * 2;

impl Move {
    pub fn new(piece: PieceKind, at: Square) -> Move {
        Move { piece, at }
    }

    /// Row-major square order, Small before Large.
    pub fn index(self) -> usize {
        self.at.index() * 2 + self.piece.index()
    }

    pub fn from_index(index: usize) -> Option<Move> {
        let at = Square::from_index(index / 2)?;
        let piece = PieceKind::BOTH[index % 2];
        Some(Move { piece, at })
    }

    /// All 72 (kind, square) pairs in index order.
    pub fn all() -> impl Iterator<Item = Move> {
        (0..MOVE_SPACE).filter_map(Move::from_index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecisionChoice {
    /// Three adjacent collinear squares, sorted.
    RemoveAlignment([Square; 3]),
    GraduateOne(Square),
}

impl DecisionChoice {
    pub fn squares(&self) -> &[Square] {
        match self {
            DecisionChoice::RemoveAlignment(w) => w,
            DecisionChoice::GraduateOne(sq) => std::slice::from_ref(sq),
        }
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize,
)]
pub struct Pool {
    pub small: u8,
    pub large: u8,
}

impl Pool {
    pub fn total(self) -> u8 {
        self.small + self.large
    }

    pub fn has(self, kind: PieceKind) -> bool {
        self.count(kind) > 0
    }

    pub fn count(self, kind: PieceKind) -> u8 {
        match kind {
            PieceKind::Small => self.small,
            PieceKind::Large => self.large,
        }
    }

    fn add(&mut self, kind: PieceKind) {
        match kind {
            PieceKind::Small => self.small += 1,
            PieceKind::Large => self.large += 1,
        }
    }

    fn remove(&mut self, kind: PieceKind) {
        match kind {
            PieceKind::Small => self.small -= 1,
            PieceKind::Large => self.large -= 1,
        }
    }
}

/// What the player to move must do next.
///
/// Pending choices are a function of the board and the deciding player; see
/// [`GameState::pending_choices`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Placement,
    /// Several alignment windows exist; the mover picks one to remove.
    AwaitingRemoval,
    /// All 8 of the mover's pieces are on the board; the mover picks one to take back.
    AwaitingGraduation,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("the game is over")]
    GameOver,
    #[error("a removal or graduation decision is pending")]
    DecisionPending,
    #[error("no decision is pending")]
    NoDecisionPending,
    #[error("square {0} is occupied")]
    Occupied(Square),
    #[error("no {0:?} piece left in the pool")]
    PieceUnavailable(PieceKind),
    #[error("{0} is not one of the offered choices")]
    InvalidChoice(DecisionChoice),
    #[error("invalid position: {0}")]
    InvalidPosition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GameState {
    board: Board,
    pools: [Pool; 2],
    to_move: Player,
    phase: Phase,
    result: Option<Player>,
    ply: u32,
}

impl Default for GameState {
    fn default() -> Self {
        GameState::new()
    }
}

impl GameState {
    /// Empty board, both pools holding 8 Small pieces, P1 to move.
    pub fn new() -> GameState {
        GameState {
            board: Board::empty(),
            pools: [Pool {
                small: PIECES_PER_PLAYER,
                large: 0,
            }; 2],
            to_move: Player::One,
            phase: Phase::Placement,
            result: None,
            ply: 0,
        }
    }

    /// Builds a placement-phase position. Pools must complete each player's 8 pieces, neither
    /// player may already hold a winning position, and the mover needs a piece to place.
    pub fn from_position(
        board: Board,
        pools: [Pool; 2],
        to_move: Player,
    ) -> Result<GameState, EngineError> {
        for p in Player::BOTH {
            let total = board.count(p) + pools[p.index()].total();
            if total != PIECES_PER_PLAYER {
                return Err(EngineError::InvalidPosition(format!(
                    "{p} has {total} pieces instead of {PIECES_PER_PLAYER}"
                )));
            }
            if board.has_large_triple(p) || board.count_of(p, PieceKind::Large) == PIECES_PER_PLAYER
            {
                return Err(EngineError::InvalidPosition(format!("{p} has already won")));
            }
        }
        if pools[to_move.index()].total() == 0 {
            return Err(EngineError::InvalidPosition(format!(
                "{to_move} has no piece to place"
            )));
        }
        Ok(GameState {
            board,
            pools,
            to_move,
            phase: Phase::Placement,
            result: None,
            ply: 0,
        })
    }

    pub fn board(&self) -> &Board {
        &self.board
    }

    pub fn pool(&self, player: Player) -> Pool {
        self.pools[player.index()]
    }

    pub fn to_move(&self) -> Player {
        self.to_move
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn ply(&self) -> u32 {
        self.ply
    }

    pub fn result(&self) -> Option<Player> {
        self.result
    }

    pub fn is_terminal(&self) -> bool {
        self.result.is_some()
    }

    /// Large pieces owned by `player`, on the board or in the pool.
    pub fn large_owned(&self, player: Player) -> u8 {
        self.board.count_of(player, PieceKind::Large) + self.pools[player.index()].large
    }

    /// Choices offered to the mover in a decision phase; empty during placement.
    pub fn pending_choices(&self) -> Vec<DecisionChoice> {
        match self.phase {
            Phase::Placement => Vec::new(),
            Phase::AwaitingRemoval => find_alignments(&self.board, self.to_move)
                .into_iter()
                .map(DecisionChoice::RemoveAlignment)
                .collect(),
            Phase::AwaitingGraduation => Square::iter_mask(self.board.pieces(self.to_move))
                .map(DecisionChoice::GraduateOne)
                .collect(),
        }
    }

    fn check_placement_phase(&self) -> Result<(), EngineError> {
        if self.result.is_some() {
            return Err(EngineError::GameOver);
        }
        if self.phase != Phase::Placement {
            return Err(EngineError::DecisionPending);
        }
        Ok(())
    }

    /// Legal placements in row-major square order, Small before Large.
    pub fn legal_moves(&self) -> Result<Vec<Move>, EngineError> {
        self.check_placement_phase()?;
        let pool = self.pools[self.to_move.index()];
        let free = self.board.free();
        let mut moves = Vec::with_capacity(free.count_ones() as usize * 2);
        for at in Square::iter_mask(free) {
            for piece in PieceKind::BOTH {
                if pool.has(piece) {
                    moves.push(Move { piece, at });
                }
            }
        }
        Ok(moves)
    }

    /// Number of legal placements, without allocating.
    pub fn legal_move_count(&self) -> usize {
        if self.check_placement_phase().is_err() {
            return 0;
        }
        let pool = self.pools[self.to_move.index()];
        let kinds = pool.has(PieceKind::Small) as usize + pool.has(PieceKind::Large) as usize;
        self.board.free().count_ones() as usize * kinds
    }

    pub fn is_legal(&self, mv: Move) -> Result<(), EngineError> {
        self.check_placement_phase()?;
        if !self.board.is_free(mv.at) {
            return Err(EngineError::Occupied(mv.at));
        }
        if !self.pools[self.to_move.index()].has(mv.piece) {
            return Err(EngineError::PieceUnavailable(mv.piece));
        }
        Ok(())
    }

    /// Places a piece, pushes neighbors, then runs the end-of-turn sequence. May leave the
    /// mover in a decision phase.
    pub fn apply_move(&self, mv: Move) -> Result<GameState, EngineError> {
        self.is_legal(mv)?;
        let mut next = *self;
        next.place(mv);
        Ok(next)
    }

    /// Plays `mv` and resolves any decision it opens with [`border_choice`]. The caller
    /// guarantees legality.
    pub(crate) fn apply_move_resolved(&self, mv: Move) -> GameState {
        debug_assert!(self.is_legal(mv).is_ok());
        let mut next = *self;
        next.place(mv);
        if next.phase != Phase::Placement {
            let choice = border_choice(&next.pending_choices(), &next.board);
            next.apply_choice(choice);
        }
        next
    }

    /// Checked counterpart of the search-internal auto-resolving move.
    pub fn apply_move_auto(&self, mv: Move) -> Result<GameState, EngineError> {
        self.is_legal(mv)?;
        Ok(self.apply_move_resolved(mv))
    }

    fn place(&mut self, mv: Move) {
        let mover = self.to_move;
        self.pools[mover.index()].remove(mv.piece);
        self.board.put(mv.at, mover, mv.piece);
        let before = self.board;
        for_each_boop(&before, mv.at, mv.piece, |from, to| {
            let (owner, kind) = self.board.take(from).expect("pushed square is occupied");
            match to {
                Some(dest) => self.board.put(dest, owner, kind),
                None => self.pools[owner.index()].add(kind),
            }
        });
        self.ply += 1;
        self.end_turn();
    }

    fn check_victory(&mut self) -> bool {
        let mover = self.to_move;
        let opponent = mover.opponent();
        if self.board.has_large_triple(mover)
            || self.board.count_of(mover, PieceKind::Large) == PIECES_PER_PLAYER
        {
            self.result = Some(mover);
        } else if self.board.has_large_triple(opponent) {
            self.result = Some(opponent);
        }
        self.result.is_some()
    }

    fn end_turn(&mut self) {
        if self.check_victory() {
            return;
        }
        let mover = self.to_move;
        let windows = find_alignments(&self.board, mover);
        match windows.len() {
            0 if self.pools[mover.index()].total() == 0 => {
                self.phase = Phase::AwaitingGraduation;
            }
            0 => self.pass_turn(),
            1 => {
                self.remove_to_pool(&windows[0]);
                self.pass_turn();
            }
            _ => self.phase = Phase::AwaitingRemoval,
        }
    }

    fn pass_turn(&mut self) {
        self.phase = Phase::Placement;
        self.to_move = self.to_move.opponent();
    }

    /// Removed pieces go back to the owner's pool as Large.
    fn remove_to_pool(&mut self, squares: &[Square]) {
        for &sq in squares {
            let (owner, _) = self.board.take(sq).expect("removed square is occupied");
            self.pools[owner.index()].add(PieceKind::Large);
        }
    }

    fn apply_choice(&mut self, choice: DecisionChoice) {
        self.remove_to_pool(choice.squares());
        if !self.check_victory() {
            self.pass_turn();
        }
    }

    pub fn resolve_decision(&self, choice: DecisionChoice) -> Result<GameState, EngineError> {
        if self.result.is_some() {
            return Err(EngineError::GameOver);
        }
        if self.phase == Phase::Placement {
            return Err(EngineError::NoDecisionPending);
        }
        if !self.pending_choices().contains(&choice) {
            return Err(EngineError::InvalidChoice(choice));
        }
        let mut next = *self;
        next.apply_choice(choice);
        Ok(next)
    }

    pub fn game_result(&self) -> Option<Player> {
        self.result
    }
}

/// The choice touching the most border squares; ties go to the earliest choice in the list.
pub fn border_choice(choices: &[DecisionChoice], _board: &Board) -> DecisionChoice {
    assert!(
        !choices.is_empty(),
        "border_choice needs at least one choice"
    );
    let border_count = |c: &DecisionChoice| c.squares().iter().filter(|s| s.is_border()).count();
    let mut best = choices[0];
    let mut best_count = border_count(&best);
    for c in &choices[1..] {
        let n = border_count(c);
        if n > best_count {
            best = *c;
            best_count = n;
        }
    }
    best
}

pub fn legal_moves(state: &GameState) -> Result<Vec<Move>, EngineError> {
    state.legal_moves()
}

pub fn apply_move(state: &GameState, mv: Move) -> Result<GameState, EngineError> {
    state.apply_move(mv)
}

pub fn resolve_decision(
    state: &GameState,
    choice: DecisionChoice,
) -> Result<GameState, EngineError> {
    state.resolve_decision(choice)
}

pub fn game_result(state: &GameState) -> Option<Player> {
    state.game_result()
}

impl Board {
    pub fn with_piece(
        mut self,
        sq: Square,
        player: Player,
        kind: PieceKind,
    ) -> Result<Board, EngineError> {
        if !self.is_free(sq) {
            return Err(EngineError::Occupied(sq));
        }
        self.put(sq, player, kind);
        Ok(self)
    }

    /// Parses a 6-line diagram, row 6 first. `x`/`X` are P1 Small/Large, `o`/`O` are P2
    /// Small/Large, `.` is empty. Whitespace inside a line is ignored.
    pub fn from_diagram(diagram: &str) -> Result<Board, EngineError> {
        let rows: Vec<Vec<char>> = diagram
            .lines()
            .map(|l| l.chars().filter(|c| !c.is_whitespace()).collect::<Vec<_>>())
            .filter(|l| !l.is_empty())
            .collect();
        if rows.len() != 6 || rows.iter().any(|r| r.len() != 6) {
            return Err(EngineError::InvalidPosition(
                "diagram must be 6 rows of 6 cells".into(),
            ));
        }
        let mut board = Board::empty();
        for (i, line) in rows.iter().enumerate() {
            let row = 6 - i as u8;
            for (j, &ch) in line.iter().enumerate() {
                let sq = Square::new(row, j as u8 + 1).expect("in range");
                let piece = match ch {
                    'x' => Some((Player::One, PieceKind::Small)),
                    'X' => Some((Player::One, PieceKind::Large)),
                    'o' => Some((Player::Two, PieceKind::Small)),
                    'O' => Some((Player::Two, PieceKind::Large)),
                    '.' => None,
                    other => {
                        return Err(EngineError::InvalidPosition(format!(
                            "unknown diagram cell {other:?}"
                        )))
                    }
                };
                if let Some((p, k)) = piece {
                    board.put(sq, p, k);
                }
            }
        }
        Ok(board)
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in (1..=6).rev() {
            write!(f, "{row} ")?;
            for col in 1..=6 {
                let sq = Square::new(row, col).expect("in range");
                let ch = match self.get(sq) {
                    None => '.',
                    Some((Player::One, PieceKind::Small)) => 'x',
                    Some((Player::One, PieceKind::Large)) => 'X',
                    Some((Player::Two, PieceKind::Small)) => 'o',
                    Some((Player::Two, PieceKind::Large)) => 'O',
                };
                write!(f, "{ch}")?;
                if col < 6 {
                    f.write_str(" ")?;
                }
            }
            f.write_str("\n")?;
        }
        f.write_str("  a b c d e f")
    }
}
