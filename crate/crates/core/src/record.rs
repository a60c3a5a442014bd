//! Game records: one JSON document per game.
//!
//! ```json
//! {
//!   "format": "boop-game/1",
//!   "seed": 17,
//!   "p1": { "kind": "mcts+SEP", "params": {..}, "weights": {..}, "seed": 123 },
//!   "p2": null,
//!   "events": ["S@c3", "S@d4", "R@a1-b1-c1", "G@b2", ..],
//!   "winner": "P2",
//!   "plies": 41,
//!   "anomaly": null
//! }
//! ```
//!
//! `events` interleaves placements (`S@c3`, `L@f6`) with decision resolutions (`R@..` for an
//! alignment removal, `G@..` for a graduation). `plies` counts placements only.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::engine::{DecisionChoice, EngineError, GameState, Move, NotationError, Player};
use crate::search::AgentConfig;

pub const RECORD_FORMAT: &str = "boop-game/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Event {
    Place(Move),
    Decide(DecisionChoice),
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Place(m) => m.fmt(f),
            Event::Decide(d) => d.fmt(f),
        }
    }
}

impl FromStr for Event {
    type Err = NotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.starts_with("R@") || s.starts_with("G@") {
            s.parse().map(Event::Decide)
        } else {
            s.parse().map(Event::Place)
        }
    }
}

impl Serialize for Event {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Event {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameRecord {
    pub format: String,
    pub seed: u64,
    /// Agent configuration per seat; `null` marks a human player.
    pub p1: Option<AgentConfig>,
    pub p2: Option<AgentConfig>,
    pub events: Vec<Event>,
    pub winner: Option<Player>,
    pub plies: u32,
    /// Set when the game was stopped by the ply cap.
    pub anomaly: Option<String>,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("malformed record at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported record format {0:?}")]
    Format(String),
    #[error("replay failed at event {event} (ply {ply}, {text}): {source}")]
    Replay {
        event: usize,
        ply: u32,
        text: String,
        source: EngineError,
    },
    #[error("replay ended with winner {actual:?} after {actual_plies} plies, record says {expected:?} after {expected_plies}")]
    Mismatch {
        expected: Option<Player>,
        actual: Option<Player>,
        expected_plies: u32,
        actual_plies: u32,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GameRecord {
    pub fn new(seed: u64, p1: Option<AgentConfig>, p2: Option<AgentConfig>) -> GameRecord {
        GameRecord {
            format: RECORD_FORMAT.to_string(),
            seed,
            p1,
            p2,
            events: Vec::new(),
            winner: None,
            plies: 0,
            anomaly: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<GameRecord, RecordError> {
        let record: GameRecord = serde_json::from_str(text).map_err(|e| RecordError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if record.format != RECORD_FORMAT {
            return Err(RecordError::Format(record.format));
        }
        Ok(record)
    }

    pub fn write(&self, path: &Path) -> Result<(), RecordError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<GameRecord, RecordError> {
        GameRecord::from_json(&std::fs::read_to_string(path)?)
    }

    /// Replays the events through the engine and returns the final state. Fails on the
    /// first illegal event, or if the outcome differs from the recorded one.
    pub fn replay(&self) -> Result<GameState, RecordError> {
        let mut state = GameState::new();
        for (i, ev) in self.events.iter().enumerate() {
            let next = match ev {
                Event::Place(m) => state.apply_move(*m),
                Event::Decide(d) => state.resolve_decision(*d),
            };
            state = next.map_err(|source| RecordError::Replay {
                event: i,
                ply: state.ply() + 1,
                text: ev.to_string(),
                source,
            })?;
        }
        let decided = self.winner.is_some() && self.anomaly.is_none();
        let actual = state.game_result();
        if state.ply() != self.plies || (decided && actual != self.winner) {
            return Err(RecordError::Mismatch {
                expected: self.winner,
                actual,
                expected_plies: self.plies,
                actual_plies: state.ply(),
            });
        }
        Ok(state)
    }
}
