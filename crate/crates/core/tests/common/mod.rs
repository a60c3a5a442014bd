//! Independent oracles: a grid-based reference engine, heuristic and brute-force solver
//! written directly from the rules, sharing no code with the crate beyond its public types.

#![allow(dead_code)]

use std::sync::OnceLock;

use boop_core::engine::{
    DecisionChoice, GameState, Move, Phase, PieceKind, Player, Square, MOVE_SPACE, PLY_CAP,
};
use boop_core::heuristic::HeuristicWeights;
use boop_core::solver::{solve_all_best, MoveMask, SolverError};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Cell = Option<(Player, PieceKind)>;

const N: i32 = 6;
const STEPS: [(i32, i32); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

fn on_board(r: i32, c: i32) -> bool {
    (0..N).contains(&r) && (0..N).contains(&c)
}

fn idx(r: i32, c: i32) -> usize {
    (r * N + c) as usize
}

fn is_border(i: usize) -> bool {
    let (r, c) = (i as i32 / N, i as i32 % N);
    r == 0 || c == 0 || r == N - 1 || c == N - 1
}

/// All collinear runs of three adjacent squares, as sorted index triples, in lexicographic order.
pub fn windows() -> Vec<[usize; 3]> {
    static WINDOWS: OnceLock<Vec<[usize; 3]>> = OnceLock::new();
    WINDOWS.get_or_init(enumerate_windows).clone()
}

fn enumerate_windows() -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..36 {
        for b in a + 1..36 {
            for c in b + 1..36 {
                let (ra, ca) = (a as i32 / N, a as i32 % N);
                let (rb, cb) = (b as i32 / N, b as i32 % N);
                let (rc, cc) = (c as i32 / N, c as i32 % N);
                let (dr, dc) = (rb - ra, cb - ca);
                if dr.abs() <= 1 && dc.abs() <= 1 && (rc - rb, cc - cb) == (dr, dc) {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// Unordered adjacent square pairs in the four line directions.
pub fn adjacent_pairs() -> Vec<[usize; 2]> {
    static PAIRS: OnceLock<Vec<[usize; 2]>> = OnceLock::new();
    PAIRS.get_or_init(enumerate_pairs).clone()
}

fn enumerate_pairs() -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for a in 0..36 {
        for b in a + 1..36 {
            let (dr, dc) = (
                (b / 6) as i32 - (a / 6) as i32,
                (b % 6) as i32 - (a % 6) as i32,
            );
            if dr.abs() <= 1 && dc.abs() <= 1 {
                out.push([a, b]);
            }
        }
    }
    out
}

/// Exhaustive maximum of (pairs, triples) over every set of exactly `k` squares.
pub fn max_lines(k: usize) -> (u32, u32) {
    let mut nbr = [0u64; 36];
    for [a, b] in adjacent_pairs() {
        nbr[a] |= 1 << b;
        nbr[b] |= 1 << a;
    }
    let mut by_last: Vec<Vec<[usize; 2]>> = vec![Vec::new(); 36];
    for [a, b, c] in windows() {
        by_last[c].push([a, b]);
    }
    struct Search {
        nbr: [u64; 36],
        by_last: Vec<Vec<[usize; 2]>>,
        best: (u32, u32),
    }
    impl Search {
        fn go(&mut self, start: usize, left: usize, set: u64, pairs: u32, triples: u32) {
            if left == 0 {
                self.best.0 = self.best.0.max(pairs);
                self.best.1 = self.best.1.max(triples);
                return;
            }
            for i in start..=36 - left {
                let p = (set & self.nbr[i]).count_ones();
                let t = self.by_last[i]
                    .iter()
                    .filter(|[a, b]| set & (1 << a) != 0 && set & (1 << b) != 0)
                    .count() as u32;
                self.go(i + 1, left - 1, set | 1 << i, pairs + p, triples + t);
            }
        }
    }
    let mut search = Search {
        nbr,
        by_last,
        best: (0, 0),
    };
    search.go(0, k, 0, 0, 0);
    search.best
}

fn eight_piece_line_bounds() -> (u32, u32) {
    static BOUNDS: OnceLock<(u32, u32)> = OnceLock::new();
    *BOUNDS.get_or_init(|| max_lines(8))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefPhase {
    Place,
    Remove,
    Graduate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefGame {
    pub cells: [Cell; 36],
    /// `[player][small, large]`
    pub pools: [[u8; 2]; 2],
    pub to_move: Player,
    pub phase: RefPhase,
    pub winner: Option<Player>,
    pub ply: u32,
}

fn kind_slot(k: PieceKind) -> usize {
    match k {
        PieceKind::Small => 0,
        PieceKind::Large => 1,
    }
}

fn seat(p: Player) -> usize {
    match p {
        Player::One => 0,
        Player::Two => 1,
    }
}

impl RefGame {
    pub fn new() -> RefGame {
        RefGame {
            cells: [None; 36],
            pools: [[8, 0], [8, 0]],
            to_move: Player::One,
            phase: RefPhase::Place,
            winner: None,
            ply: 0,
        }
    }

    pub fn from_state(s: &GameState) -> RefGame {
        let mut cells = [None; 36];
        for sq in Square::all() {
            cells[sq.index()] = s.board().get(sq);
        }
        let pool = |p| [s.pool(p).small, s.pool(p).large];
        RefGame {
            cells,
            pools: [pool(Player::One), pool(Player::Two)],
            to_move: s.to_move(),
            phase: match s.phase() {
                Phase::Placement => RefPhase::Place,
                Phase::AwaitingRemoval => RefPhase::Remove,
                Phase::AwaitingGraduation => RefPhase::Graduate,
            },
            winner: s.game_result(),
            ply: s.ply(),
        }
    }

    pub fn legal_moves(&self) -> Vec<(PieceKind, usize)> {
        if self.winner.is_some() || self.phase != RefPhase::Place {
            return Vec::new();
        }
        let mut out = Vec::new();
        for i in 0..36 {
            for k in [PieceKind::Small, PieceKind::Large] {
                if self.cells[i].is_none() && self.pools[seat(self.to_move)][kind_slot(k)] > 0 {
                    out.push((k, i));
                }
            }
        }
        out
    }

    fn large_line(&self, p: Player) -> bool {
        windows().iter().any(|w| {
            w.iter()
                .all(|&i| self.cells[i] == Some((p, PieceKind::Large)))
        })
    }

    fn own_windows(&self, p: Player) -> Vec<[usize; 3]> {
        windows()
            .into_iter()
            .filter(|w| {
                w.iter()
                    .all(|&i| matches!(self.cells[i], Some((q, _)) if q == p))
            })
            .collect()
    }

    /// Options of the pending decision, as square lists, in the order they are offered.
    pub fn choices(&self) -> Vec<Vec<usize>> {
        match self.phase {
            RefPhase::Place => Vec::new(),
            RefPhase::Remove => self
                .own_windows(self.to_move)
                .into_iter()
                .map(|w| w.to_vec())
                .collect(),
            RefPhase::Graduate => (0..36)
                .filter(|&i| matches!(self.cells[i], Some((q, _)) if q == self.to_move))
                .map(|i| vec![i])
                .collect(),
        }
    }

    fn victory(&mut self) -> bool {
        let me = self.to_move;
        let large_on_board = self
            .cells
            .iter()
            .filter(|c| **c == Some((me, PieceKind::Large)))
            .count();
        if self.large_line(me) || large_on_board == 8 {
            self.winner = Some(me);
        } else if self.large_line(me.opponent()) {
            self.winner = Some(me.opponent());
        }
        self.winner.is_some()
    }

    fn pass(&mut self) {
        self.phase = RefPhase::Place;
        self.to_move = self.to_move.opponent();
    }

    fn take_to_pool_as_large(&mut self, squares: &[usize]) {
        for &i in squares {
            let (owner, _) = self.cells[i].take().expect("occupied");
            self.pools[seat(owner)][1] += 1;
        }
    }

    /// Places a piece; pushes are applied one neighbor at a time in `order`.
    pub fn place(&mut self, kind: PieceKind, at: usize, order: &[usize; 8]) {
        let me = self.to_move;
        self.pools[seat(me)][kind_slot(kind)] -= 1;
        self.cells[at] = Some((me, kind));
        let (r, c) = (at as i32 / N, at as i32 % N);
        for &d in order {
            let (dr, dc) = STEPS[d];
            let (nr, nc) = (r + dr, c + dc);
            if !on_board(nr, nc) {
                continue;
            }
            let Some((owner, nk)) = self.cells[idx(nr, nc)] else {
                continue;
            };
            if kind == PieceKind::Small && nk == PieceKind::Large {
                continue;
            }
            let (tr, tc) = (nr + dr, nc + dc);
            if !on_board(tr, tc) {
                self.cells[idx(nr, nc)] = None;
                self.pools[seat(owner)][kind_slot(nk)] += 1;
            } else if self.cells[idx(tr, tc)].is_none() {
                self.cells[idx(nr, nc)] = None;
                self.cells[idx(tr, tc)] = Some((owner, nk));
            }
        }
        self.ply += 1;
        if self.victory() {
            return;
        }
        let ws = self.own_windows(me);
        match ws.len() {
            0 if self.pools[seat(me)] == [0, 0] => self.phase = RefPhase::Graduate,
            0 => self.pass(),
            1 => {
                self.take_to_pool_as_large(&ws[0]);
                self.pass();
            }
            _ => self.phase = RefPhase::Remove,
        }
    }

    pub fn decide(&mut self, squares: &[usize]) {
        self.take_to_pool_as_large(squares);
        if !self.victory() {
            self.pass();
        }
    }

    /// The pending option with the most border squares; the first one on ties.
    pub fn border_pick(&self) -> Vec<usize> {
        let choices = self.choices();
        let score = |c: &Vec<usize>| c.iter().filter(|&&i| is_border(i)).count();
        let mut best = choices[0].clone();
        for c in &choices[1..] {
            if score(c) > score(&best) {
                best = c.clone();
            }
        }
        best
    }

    /// Plays a move and settles any decision with [`RefGame::border_pick`].
    pub fn play_resolved(&self, kind: PieceKind, at: usize) -> RefGame {
        let mut next = self.clone();
        next.place(kind, at, &[0, 1, 2, 3, 4, 5, 6, 7]);
        if next.winner.is_none() && next.phase != RefPhase::Place {
            let pick = next.border_pick();
            next.decide(&pick);
        }
        next
    }

    fn side_value(&self, p: Player, w: &HeuristicWeights) -> f64 {
        let mine = |i: usize| matches!(self.cells[i], Some((q, _)) if q == p);
        let kind = |i: usize| self.cells[i].map(|(_, k)| k);
        let owned: Vec<usize> = (0..36).filter(|&i| mine(i)).collect();
        let count = owned.len() as f64;
        let center = owned.iter().filter(|&&i| !is_border(i)).count() as f64;
        let border = owned.iter().filter(|&&i| is_border(i)).count() as f64;
        let large = owned
            .iter()
            .filter(|&&i| kind(i) == Some(PieceKind::Large))
            .count() as f64
            + self.pools[seat(p)][1] as f64;
        let mut line = 0.0;
        let classify = |squares: &[usize]| {
            let larges = squares
                .iter()
                .filter(|&&i| kind(i) == Some(PieceKind::Large))
                .count();
            if larges == 0 {
                0
            } else if larges == squares.len() {
                2
            } else {
                1
            }
        };
        for pair in adjacent_pairs() {
            if pair.iter().all(|&i| mine(i)) {
                line += [w.align2.small, w.align2.mixed, w.align2.large][classify(&pair)];
            }
        }
        for win in windows() {
            if win.iter().all(|&i| mine(i)) {
                line += [w.align3.small, w.align3.mixed, w.align3.large][classify(&win)];
            }
        }
        w.count * count + w.center * center + w.border * border + w.large_owned * large + line
    }

    pub fn max_bound(w: &HeuristicWeights) -> f64 {
        let unit = w.count.abs() + w.center.abs() + w.border.abs() + w.large_owned.abs();
        let a2 = w
            .align2
            .small
            .abs()
            .max(w.align2.mixed.abs())
            .max(w.align2.large.abs());
        let a3 = w
            .align3
            .small
            .abs()
            .max(w.align3.mixed.abs())
            .max(w.align3.large.abs());
        let (pairs, triples) = eight_piece_line_bounds();
        8.0 * unit + pairs as f64 * a2 + triples as f64 * a3
    }

    pub fn raw(&self, p: Player, w: &HeuristicWeights) -> f64 {
        self.side_value(p, w) - self.side_value(p.opponent(), w)
    }

    /// Score of this (post-move) position for `p`: ±1 when decided, else raw / MAX clamped.
    pub fn score(&self, p: Player, w: &HeuristicWeights) -> f64 {
        match self.winner {
            Some(x) if x == p => 1.0,
            Some(_) => -1.0,
            None => (self.raw(p, w) / RefGame::max_bound(w)).clamp(-1.0, 1.0),
        }
    }

    pub fn matches(&self, s: &GameState) -> bool {
        *self == RefGame::from_state(s)
    }
}

/// Every valid (move, score) of the state by brute force over all 72 piece/square pairs.
pub fn brute_force_scores(
    state: &GameState,
    masked: &dyn Fn(Move) -> bool,
    w: &HeuristicWeights,
) -> Vec<(Move, f64)> {
    let game = RefGame::from_state(state);
    let me = game.to_move;
    let mut out = Vec::new();
    if game.winner.is_some() || game.phase != RefPhase::Place {
        return out;
    }
    for i in 0..36 {
        for k in [PieceKind::Small, PieceKind::Large] {
            let mv = Move::new(k, Square::from_index(i).unwrap());
            if game.cells[i].is_some() || game.pools[seat(me)][kind_slot(k)] == 0 || masked(mv) {
                continue;
            }
            out.push((mv, game.play_resolved(k, i).score(me, w)));
        }
    }
    out
}

/// A random reachable placement-phase state: random moves with border-resolved decisions.
pub fn random_state(rng: &mut ChaCha8Rng, max_plies: u32) -> GameState {
    loop {
        let mut s = GameState::new();
        let plies = rng.gen_range(0..=max_plies);
        while s.ply() < plies && !s.is_terminal() {
            s = random_step(&s, rng);
        }
        if !s.is_terminal() {
            return s;
        }
    }
}

/// One random placement followed by random decision choices.
pub fn random_step(s: &GameState, rng: &mut ChaCha8Rng) -> GameState {
    let mv = *s.legal_moves().unwrap().choose(rng).unwrap();
    let mut next = s.apply_move(mv).unwrap();
    while !next.is_terminal() && next.phase() != Phase::Placement {
        let c = *next.pending_choices().choose(rng).unwrap();
        next = next.resolve_decision(c).unwrap();
    }
    next
}

pub fn choice_squares(c: &DecisionChoice) -> Vec<usize> {
    c.squares().iter().map(|s| s.index()).collect()
}

pub fn conserved(s: &GameState) -> bool {
    Player::BOTH
        .iter()
        .all(|&p| s.board().count(p) + s.pool(p).total() == 8)
}

/// Plays one random game through both the engine and the reference, with pushes applied in a
/// random neighbor order on the reference side. Returns the number of placements.
pub fn lockstep_game(seed: u64) -> u32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = GameState::new();
    let mut r = RefGame::new();
    while !s.is_terminal() && s.ply() < PLY_CAP {
        let legal = s.legal_moves().unwrap();
        let mut expected: Vec<(PieceKind, usize)> = r.legal_moves();
        let mut actual: Vec<(PieceKind, usize)> =
            legal.iter().map(|m| (m.piece, m.at.index())).collect();
        expected.sort();
        actual.sort();
        assert_eq!(actual, expected, "legal moves differ at ply {}", s.ply());

        let mv = *legal.choose(&mut rng).unwrap();
        let mut order = [0, 1, 2, 3, 4, 5, 6, 7];
        order.shuffle(&mut rng);
        s = s.apply_move(mv).unwrap();
        r.place(mv.piece, mv.at.index(), &order);
        assert!(
            r.matches(&s),
            "after {mv} at ply {}:\n{}",
            s.ply(),
            s.board()
        );
        assert!(conserved(&s));

        while !s.is_terminal() && s.phase() != Phase::Placement {
            let choices = s.pending_choices();
            let listed: Vec<Vec<usize>> = choices.iter().map(choice_squares).collect();
            assert_eq!(listed, r.choices());
            let c = *choices.choose(&mut rng).unwrap();
            s = s.resolve_decision(c).unwrap();
            r.decide(&choice_squares(&c));
            assert!(r.matches(&s));
        }
    }
    if s.is_terminal() {
        assert!(s.game_result().is_some());
        assert!(s.legal_moves().is_err());
    }
    s.ply()
}

pub fn random_mask(rng: &mut ChaCha8Rng, density: f64) -> MoveMask {
    (0..MOVE_SPACE)
        .filter_map(Move::from_index)
        .filter(|_| rng.gen_bool(density))
        .collect()
}

/// Checks the solver against the brute-force oracle on one (state, mask).
pub fn check_solver(state: &GameState, mask: MoveMask, w: &HeuristicWeights) {
    let oracle = brute_force_scores(state, &|m| mask.contains(m), w);
    let solved = solve_all_best(state, &mask, w);
    if oracle.is_empty() {
        assert_eq!(solved, Err(SolverError::NoValidMove));
        return;
    }
    let sol = solved.unwrap();
    // completeness and soundness: the same moves, with the same scores
    let mut got: Vec<(usize, f64)> = sol
        .all
        .iter()
        .map(|s| (s.mv.index(), s.score.value()))
        .collect();
    let mut want: Vec<(usize, f64)> = oracle.iter().map(|(m, s)| (m.index(), *s)).collect();
    got.sort_by_key(|x| x.0);
    want.sort_by_key(|x| x.0);
    assert_eq!(got, want);
    // optimality: best is exactly the set of maximizers
    let top = oracle.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    let mut maximizers: Vec<usize> = oracle
        .iter()
        .filter(|x| x.1 == top)
        .map(|x| x.0.index())
        .collect();
    let mut best: Vec<usize> = sol.best.iter().map(|s| s.mv.index()).collect();
    maximizers.sort();
    best.sort();
    assert_eq!(best, maximizers);
    assert!(sol.all.windows(2).all(|p| p[0].score >= p[1].score));
    assert!(sol.all.iter().all(|s| !mask.contains(s.mv)));
}
