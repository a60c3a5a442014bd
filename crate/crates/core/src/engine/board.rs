use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

pub const SIZE: u8 = 6;
pub const SQUARES: usize = 36;
pub const PIECES_PER_PLAYER: u8 = 8;

/// All 36 squares set.
pub const FULL: u64 = (1 << SQUARES) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    #[serde(rename = "P1")]
    One,
    #[serde(rename = "P2")]
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::One => f.write_str("P1"),
            Player::Two => f.write_str("P2"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceKind {
    Small,
    Large,
}

impl PieceKind {
    pub const BOTH: [PieceKind; 2] = [PieceKind::Small, PieceKind::Large];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            PieceKind::Small => 'S',
            PieceKind::Large => 'L',
        }
    }
}

/// A board square, stored as a row-major index `(row - 1) * 6 + (col - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square(u8);

impl Square {
    /// `row` and `col` are 1-based.
    pub fn new(row: u8, col: u8) -> Option<Square> {
        if (1..=SIZE).contains(&row) && (1..=SIZE).contains(&col) {
            Some(Square((row - 1) * SIZE + (col - 1)))
        } else {
            None
        }
    }

    pub fn from_index(index: usize) -> Option<Square> {
        (index < SQUARES).then_some(Square(index as u8))
    }

    pub fn all() -> impl Iterator<Item = Square> {
        (0..SQUARES as u8).map(Square)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn row(self) -> u8 {
        self.0 / SIZE + 1
    }

    pub fn col(self) -> u8 {
        self.0 % SIZE + 1
    }

    pub fn bit(self) -> u64 {
        1 << self.0
    }

    pub fn is_border(self) -> bool {
        BORDER & self.bit() != 0
    }

    fn offset(self, dr: i8, dc: i8) -> Option<Square> {
        let r = self.row() as i8 + dr;
        let c = self.col() as i8 + dc;
        if r < 1 || c < 1 {
            return None;
        }
        Square::new(r as u8, c as u8)
    }

    /// Squares in `mask`, lowest index first.
    pub fn iter_mask(mut mask: u64) -> impl Iterator<Item = Square> {
        std::iter::from_fn(move || {
            if mask == 0 {
                None
            } else {
                let idx = mask.trailing_zeros();
                mask &= mask - 1;
                Some(Square(idx as u8))
            }
        })
    }
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", (b'a' + self.col() - 1) as char, self.row())
    }
}

/// The 8 king-step directions.
pub const DIRECTIONS: [(i8, i8); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// Forward directions used to enumerate lines: horizontal, vertical, diagonal, anti-diagonal.
const LINE_DIRECTIONS: [(i8, i8); 4] = [(0, 1), (1, 0), (1, 1), (1, -1)];

const fn outer_ring() -> u64 {
    let mut mask = 0u64;
    let mut i = 0;
    while i < SQUARES {
        let r = i / 6;
        let c = i % 6;
        if r == 0 || r == 5 || c == 0 || c == 5 {
            mask |= 1 << i;
        }
        i += 1;
    }
    mask
}

/// The 20 outer squares.
pub const BORDER: u64 = outer_ring();
/// The 16 interior squares (rows and columns 2..5).
pub const CENTER: u64 = FULL & !BORDER;

const fn on_board(r: i32, c: i32) -> bool {
    r >= 0 && r < SIZE as i32 && c >= 0 && c < SIZE as i32
}

const fn line_masks(dr: i32, dc: i32) -> LineMasks {
    let mut pair_starts = 0u64;
    let mut triple_starts = 0u64;
    let mut i = 0;
    while i < SQUARES {
        let (r, c) = ((i / SIZE as usize) as i32, (i % SIZE as usize) as i32);
        if on_board(r + dr, c + dc) {
            pair_starts |= 1 << i;
            if on_board(r + 2 * dr, c + 2 * dc) {
                triple_starts |= 1 << i;
            }
        }
        i += 1;
    }
    LineMasks {
        shift: (dr * SIZE as i32 + dc) as u32,
        pair_starts,
        triple_starts,
    }
}

/// Per line direction (horizontal, vertical, diagonal, anti-diagonal): the index shift and
/// the squares starting an in-board pair or triple.
pub(crate) const LINES: [LineMasks; 4] = [
    line_masks(0, 1),
    line_masks(1, 0),
    line_masks(1, 1),
    line_masks(1, -1),
];

/// Squares starting a three-in-a-row of `bits`, one mask per line direction.
pub(crate) fn triple_starts(bits: u64) -> [u64; 4] {
    LINES.map(|l| bits & (bits >> l.shift) & (bits >> (2 * l.shift)) & l.triple_starts)
}

/// A neighbor and the square one further along the same ray.
pub(crate) type Ray = Option<(Square, Option<Square>)>;

/// Precomputed geometry: neighbor rays and alignment windows.
pub(crate) struct Geometry {
    /// Indexed by square, then direction.
    pub rays: [[Ray; 8]; SQUARES],
    /// Every 3-square collinear window, ordered lexicographically by its sorted squares.
    pub windows: Vec<[Square; 3]>,
}

#[derive(Clone, Copy)]
pub(crate) struct LineMasks {
    pub shift: u32,
    pub pair_starts: u64,
    pub triple_starts: u64,
}

pub(crate) static GEOMETRY: LazyLock<Geometry> = LazyLock::new(|| {
    let mut rays = [[None; 8]; SQUARES];
    for sq in Square::all() {
        for (d, &(dr, dc)) in DIRECTIONS.iter().enumerate() {
            rays[sq.index()][d] = sq.offset(dr, dc).map(|n| (n, n.offset(dr, dc)));
        }
    }

    let mut windows = Vec::new();
    for &(dr, dc) in LINE_DIRECTIONS.iter() {
        for sq in Square::all() {
            if let Some(c) = sq.offset(dr, dc).and_then(|b| b.offset(dr, dc)) {
                let mut w = [sq, sq.offset(dr, dc).expect("inside"), c];
                w.sort();
                windows.push(w);
            }
        }
    }
    windows.sort();

    Geometry { rays, windows }
});

/// Piece placement as four bitboards, indexed by `[player][kind]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Board {
    bits: [[u64; 2]; 2],
}

impl Board {
    pub fn empty() -> Board {
        Board::default()
    }

    pub fn get(&self, sq: Square) -> Option<(Player, PieceKind)> {
        let bit = sq.bit();
        for p in Player::BOTH {
            for k in PieceKind::BOTH {
                if self.bits[p.index()][k.index()] & bit != 0 {
                    return Some((p, k));
                }
            }
        }
        None
    }

    /// Puts a piece on an empty square.
    pub(crate) fn put(&mut self, sq: Square, player: Player, kind: PieceKind) {
        debug_assert!(self.occupied() & sq.bit() == 0);
        self.bits[player.index()][kind.index()] |= sq.bit();
    }

    pub(crate) fn take(&mut self, sq: Square) -> Option<(Player, PieceKind)> {
        let found = self.get(sq)?;
        self.bits[found.0.index()][found.1.index()] &= !sq.bit();
        Some(found)
    }

    pub fn occupied(&self) -> u64 {
        self.bits[0][0] | self.bits[0][1] | self.bits[1][0] | self.bits[1][1]
    }

    pub fn free(&self) -> u64 {
        FULL & !self.occupied()
    }

    pub fn is_free(&self, sq: Square) -> bool {
        self.occupied() & sq.bit() == 0
    }

    pub fn pieces(&self, player: Player) -> u64 {
        self.bits[player.index()][0] | self.bits[player.index()][1]
    }

    pub fn pieces_of(&self, player: Player, kind: PieceKind) -> u64 {
        self.bits[player.index()][kind.index()]
    }

    pub fn count(&self, player: Player) -> u8 {
        self.pieces(player).count_ones() as u8
    }

    pub fn count_of(&self, player: Player, kind: PieceKind) -> u8 {
        self.pieces_of(player, kind).count_ones() as u8
    }

    /// True if `player` has three Large pieces in a row in any direction.
    pub fn has_large_triple(&self, player: Player) -> bool {
        has_triple(self.pieces_of(player, PieceKind::Large))
    }
}

/// Displacements caused by placing `placed_kind` on `placed`: `(from, to)`, with `to = None`
/// meaning the piece leaves the board and returns to its owner's pool.
///
/// Destinations are two steps away from `placed`, so they are never another neighbor's
/// origin and never shared between neighbors: blocking is decided on the pre-push board.
pub fn compute_boops(
    board: &Board,
    placed: Square,
    placed_kind: PieceKind,
) -> Vec<(Square, Option<Square>)> {
    let mut pushes = Vec::with_capacity(8);
    for_each_boop(board, placed, placed_kind, |from, to| {
        pushes.push((from, to))
    });
    pushes
}

pub(crate) fn for_each_boop(
    board: &Board,
    placed: Square,
    placed_kind: PieceKind,
    mut visit: impl FnMut(Square, Option<Square>),
) {
    let occupied = board.occupied();
    let large = board.pieces_of(Player::One, PieceKind::Large)
        | board.pieces_of(Player::Two, PieceKind::Large);
    for (neighbor, dest) in GEOMETRY.rays[placed.index()].iter().flatten() {
        let bit = neighbor.bit();
        if occupied & bit == 0 {
            continue;
        }
        if placed_kind == PieceKind::Small && large & bit != 0 {
            continue;
        }
        match dest {
            Some(d) if occupied & d.bit() != 0 => {}
            _ => visit(*neighbor, *dest),
        }
    }
}

/// Every window of three adjacent collinear squares held by `player`, in lexicographic
/// order of the windows' squares. A run of length `L >= 3` yields `L - 2` windows.
pub fn find_alignments(board: &Board, player: Player) -> Vec<[Square; 3]> {
    let own = board.pieces(player);
    if !has_triple(own) {
        return Vec::new();
    }
    GEOMETRY
        .windows
        .iter()
        .filter(|w| w.iter().all(|s| own & s.bit() != 0))
        .copied()
        .collect()
}

pub(crate) fn has_triple(bits: u64) -> bool {
    triple_starts(bits).iter().any(|&m| m != 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(name: &str) -> Square {
        name.parse().unwrap()
    }

    #[test]
    fn ring_masks_partition_the_board() {
        assert_eq!(BORDER.count_ones(), 20);
        assert_eq!(CENTER.count_ones(), 16);
        assert_eq!(BORDER | CENTER, FULL);
        assert!(sq("a1").is_border());
        assert!(!sq("c3").is_border());
    }

    #[test]
    fn window_count() {
        // 24 horizontal + 24 vertical + 16 + 16 diagonal
        assert_eq!(GEOMETRY.windows.len(), 80);
    }

    #[test]
    fn alignments_on_empty_board() {
        assert!(find_alignments(&Board::empty(), Player::One).is_empty());
    }

    #[test]
    fn diagonal_alignment() {
        let mut b = Board::empty();
        for s in ["a1", "b2", "c3"] {
            b.put(sq(s), Player::One, PieceKind::Small);
        }
        assert_eq!(
            find_alignments(&b, Player::One),
            vec![[sq("a1"), sq("b2"), sq("c3")]]
        );
        assert!(find_alignments(&b, Player::Two).is_empty());
    }

    #[test]
    fn four_in_a_row_gives_two_windows() {
        let mut b = Board::empty();
        for s in ["a1", "b1", "c1", "d1"] {
            b.put(sq(s), Player::Two, PieceKind::Small);
        }
        assert_eq!(
            find_alignments(&b, Player::Two),
            vec![
                [sq("a1"), sq("b1"), sq("c1")],
                [sq("b1"), sq("c1"), sq("d1")]
            ]
        );
    }

    #[test]
    fn large_triple_detection_ignores_wraparound() {
        let mut b = Board::empty();
        // e1, f1, a2 are consecutive indices but not a line
        for s in ["e1", "f1", "a2"] {
            b.put(sq(s), Player::One, PieceKind::Large);
        }
        assert!(!b.has_large_triple(Player::One));
        let mut b = Board::empty();
        for s in ["f1", "e2", "d3"] {
            b.put(sq(s), Player::One, PieceKind::Large);
        }
        assert!(b.has_large_triple(Player::One));
    }

    #[test]
    fn boop_pushes_and_blocks() {
        // White Small at c3 pushes b2 to a1 but not d4 (blocked by e5).
        let mut b = Board::empty();
        b.put(sq("b2"), Player::Two, PieceKind::Small);
        b.put(sq("d4"), Player::One, PieceKind::Small);
        b.put(sq("e5"), Player::Two, PieceKind::Small);
        b.put(sq("c3"), Player::One, PieceKind::Small);
        assert_eq!(
            compute_boops(&b, sq("c3"), PieceKind::Small),
            vec![(sq("b2"), Some(sq("a1")))]
        );
    }

    #[test]
    fn small_cannot_push_large() {
        let mut b = Board::empty();
        b.put(sq("c4"), Player::Two, PieceKind::Large);
        b.put(sq("c3"), Player::One, PieceKind::Small);
        assert!(compute_boops(&b, sq("c3"), PieceKind::Small).is_empty());
        assert_eq!(
            compute_boops(&b, sq("c3"), PieceKind::Large),
            vec![(sq("c4"), Some(sq("c5")))]
        );
    }

    #[test]
    fn edge_pushes_leave_the_board() {
        let mut b = Board::empty();
        b.put(sq("a2"), Player::Two, PieceKind::Small);
        b.put(sq("b1"), Player::Two, PieceKind::Small);
        b.put(sq("b2"), Player::Two, PieceKind::Small);
        b.put(sq("b3"), Player::Two, PieceKind::Small);
        b.put(sq("a1"), Player::One, PieceKind::Small);
        let mut pushes = compute_boops(&b, sq("a1"), PieceKind::Small);
        pushes.sort();
        assert_eq!(
            pushes,
            vec![
                (sq("b1"), Some(sq("c1"))),
                (sq("a2"), Some(sq("a3"))),
                (sq("b2"), Some(sq("c3"))),
            ]
        );

        let mut b = Board::empty();
        b.put(sq("a2"), Player::Two, PieceKind::Small);
        b.put(sq("b2"), Player::One, PieceKind::Large);
        assert_eq!(
            compute_boops(&b, sq("b2"), PieceKind::Large),
            vec![(sq("a2"), None)]
        );
    }
}
