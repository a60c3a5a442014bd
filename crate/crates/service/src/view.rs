//! JSON payloads of the HTTP API.

use boop_core::engine::{Phase, PieceKind, Player, Pool, Square};
use boop_core::record::Event;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::session::{Session, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub owner: Player,
    pub kind: PieceKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pools {
    #[serde(rename = "P1")]
    pub p1: Pool,
    #[serde(rename = "P2")]
    pub p2: Pool,
}

/// Full session state, returned by every endpoint except the record download.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: Uuid,
    pub status: Status,
    pub human: Player,
    pub agent: String,
    pub to_move: Player,
    pub phase: Phase,
    pub ply: u32,
    /// `board[r][c]` is the square at row `r + 1`, column `c + 1` (a = 1); `null` when empty.
    pub board: Vec<Vec<Option<Cell>>>,
    pub pools: Pools,
    /// Moves the human may play now; empty unless `status` is `awaiting_human`.
    pub legal_moves: Vec<String>,
    /// Choices the human may submit now; empty unless `status` is `awaiting_human_decision`.
    pub pending_choices: Vec<String>,
    pub history: Vec<Event>,
    pub last_agent_move: Option<String>,
    pub winner: Option<Player>,
    pub thinking: bool,
    pub error: Option<String>,
}

impl SessionView {
    pub(crate) fn of(s: &Session) -> SessionView {
        let status = s.status();
        let state = &s.state;
        let board = (1..=6)
            .map(|row| {
                (1..=6)
                    .map(|col| {
                        let sq = Square::new(row, col).expect("on the board");
                        state
                            .board()
                            .get(sq)
                            .map(|(owner, kind)| Cell { owner, kind })
                    })
                    .collect()
            })
            .collect();
        let legal_moves = match status {
            Status::AwaitingHuman => state
                .legal_moves()
                .unwrap_or_default()
                .iter()
                .map(ToString::to_string)
                .collect(),
            _ => Vec::new(),
        };
        let pending_choices = match status {
            Status::AwaitingHumanDecision => state
                .pending_choices()
                .iter()
                .map(ToString::to_string)
                .collect(),
            _ => Vec::new(),
        };
        SessionView {
            id: s.id,
            status,
            human: s.human,
            agent: s.agent_config.kind.to_string(),
            to_move: state.to_move(),
            phase: state.phase(),
            ply: state.ply(),
            board,
            pools: Pools {
                p1: state.pool(Player::One),
                p2: state.pool(Player::Two),
            },
            legal_moves,
            pending_choices,
            history: s.record.events.clone(),
            last_agent_move: s.last_agent_move.map(|m| m.to_string()),
            winner: s.record.winner,
            thinking: status == Status::AgentThinking,
            error: s.error.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveRequest {
    /// Placement notation, e.g. `S@c3`.
    #[serde(rename = "move")]
    pub mv: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionRequest {
    /// `R@a1-b1-c1` or `G@b2`.
    pub choice: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}
