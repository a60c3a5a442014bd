//! Human-vs-agent sessions. The agent searches on its own thread; the session is locked only to
//! read or apply moves, never during a search.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use boop_core::engine::{border_choice, DecisionChoice, GameState, Move, Phase, Player, PLY_CAP};
use boop_core::record::{Event, GameRecord};
use boop_core::search::{Agent, AgentConfig, AgentKind, Budget};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

use crate::view::SessionView;

#[derive(Debug, Error, PartialEq)]
pub enum ServiceError {
    #[error("no session {0}")]
    NotFound(Uuid),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Conflict(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    AwaitingHuman,
    AwaitingHumanDecision,
    AgentThinking,
    Finished,
}

/// Body of `POST /sessions`. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    /// Seat of the human player; P1 moves first.
    pub human: Option<Player>,
    /// Agent label: `vanilla`, `heuristic`, `mcts+SEP`, ...
    pub agent: Option<String>,
    pub budget: Option<Budget>,
    pub seed: Option<u64>,
}

pub(crate) struct Session {
    pub(crate) id: Uuid,
    pub(crate) human: Player,
    pub(crate) agent_config: AgentConfig,
    /// Taken by the thinking thread and put back when it finishes.
    agent: Option<Agent>,
    pub(crate) state: GameState,
    pub(crate) record: GameRecord,
    pub(crate) last_agent_move: Option<Move>,
    pub(crate) error: Option<String>,
}

impl Session {
    pub(crate) fn status(&self) -> Status {
        if self.state.is_terminal() || self.error.is_some() || self.record.anomaly.is_some() {
            Status::Finished
        } else if self.agent.is_none() {
            Status::AgentThinking
        } else if self.state.to_move() != self.human {
            // Only reachable between an applied human action and the agent thread starting.
            Status::AgentThinking
        } else if self.state.phase() == Phase::Placement {
            Status::AwaitingHuman
        } else {
            Status::AwaitingHumanDecision
        }
    }

    fn push(&mut self, ev: Event) {
        self.record.events.push(ev);
        self.record.plies = self.state.ply();
        if self.state.is_terminal() {
            self.record.winner = self.state.game_result();
        } else if self.state.ply() >= PLY_CAP && self.state.phase() == Phase::Placement {
            self.record.anomaly = Some(format!("ply cap {PLY_CAP} reached"));
            self.record.winner = Some(self.state.to_move().opponent());
        }
    }

    fn needs_agent(&self) -> bool {
        self.status() != Status::Finished
            && self.state.to_move() != self.human
            && self.agent.is_some()
    }
}

type Shared = Arc<(Mutex<Session>, Condvar)>;

/// All live sessions. Cheap to clone; clones share the sessions.
#[derive(Clone, Default)]
pub struct SessionManager {
    sessions: Arc<Mutex<HashMap<Uuid, Shared>>>,
    records_dir: Option<Arc<PathBuf>>,
}

impl SessionManager {
    pub fn new() -> SessionManager {
        SessionManager::default()
    }

    /// Finished games are written to `dir/<session id>.json`.
    pub fn with_records_dir(dir: PathBuf) -> SessionManager {
        SessionManager {
            sessions: Default::default(),
            records_dir: Some(Arc::new(dir)),
        }
    }

    fn get(&self, id: Uuid) -> Result<Shared, ServiceError> {
        self.sessions
            .lock()
            .expect("session map lock")
            .get(&id)
            .cloned()
            .ok_or(ServiceError::NotFound(id))
    }

    pub fn create_session(&self, req: CreateSession) -> Result<SessionView, ServiceError> {
        let kind: AgentKind = req
            .agent
            .as_deref()
            .unwrap_or("mcts+SEP")
            .parse()
            .map_err(|e| ServiceError::BadRequest(format!("{e}")))?;
        let mut config = AgentConfig::new(kind).with_seed(req.seed.unwrap_or_else(rand_seed));
        config.params.budget = req.budget.unwrap_or(Budget::Ms(1000));
        let agent = Agent::new(config).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        let human = req.human.unwrap_or(Player::One);
        let (p1, p2) = match human {
            Player::One => (None, Some(config)),
            Player::Two => (Some(config), None),
        };
        let id = Uuid::new_v4();
        let session = Session {
            id,
            human,
            agent_config: config,
            agent: Some(agent),
            state: GameState::new(),
            record: GameRecord::new(config.seed, p1, p2),
            last_agent_move: None,
            error: None,
        };
        let shared: Shared = Arc::new((Mutex::new(session), Condvar::new()));
        self.sessions
            .lock()
            .expect("session map lock")
            .insert(id, shared.clone());
        let mut guard = shared.0.lock().expect("session lock");
        let view = SessionView::of(&guard);
        if guard.needs_agent() {
            self.start_agent(&shared, &mut guard);
            return Ok(SessionView::of(&guard));
        }
        Ok(view)
    }

    pub fn get_state(&self, id: Uuid) -> Result<SessionView, ServiceError> {
        let shared = self.get(id)?;
        let guard = shared.0.lock().expect("session lock");
        Ok(SessionView::of(&guard))
    }

    pub fn get_record(&self, id: Uuid) -> Result<GameRecord, ServiceError> {
        let shared = self.get(id)?;
        let guard = shared.0.lock().expect("session lock");
        Ok(guard.record.clone())
    }

    pub fn submit_move(&self, id: Uuid, notation: &str) -> Result<SessionView, ServiceError> {
        let mv: Move = notation
            .parse()
            .map_err(|e| ServiceError::BadRequest(format!("{e}")))?;
        self.act(
            id,
            Status::AwaitingHuman,
            |state| state.apply_move(mv),
            Event::Place(mv),
        )
    }

    pub fn submit_decision(&self, id: Uuid, notation: &str) -> Result<SessionView, ServiceError> {
        let choice: DecisionChoice = notation
            .parse()
            .map_err(|e| ServiceError::BadRequest(format!("{e}")))?;
        self.act(
            id,
            Status::AwaitingHumanDecision,
            |state| state.resolve_decision(choice),
            Event::Decide(choice),
        )
    }

    fn act(
        &self,
        id: Uuid,
        expected: Status,
        apply: impl FnOnce(&GameState) -> Result<GameState, boop_core::engine::EngineError>,
        ev: Event,
    ) -> Result<SessionView, ServiceError> {
        let shared = self.get(id)?;
        let mut guard = shared.0.lock().expect("session lock");
        let status = guard.status();
        if status != expected {
            return Err(ServiceError::Conflict(match status {
                Status::AgentThinking => "the agent is thinking".to_string(),
                Status::Finished => "the game is over".to_string(),
                Status::AwaitingHuman => "a move is expected, not a decision".to_string(),
                Status::AwaitingHumanDecision => "a decision is pending".to_string(),
            }));
        }
        guard.state = apply(&guard.state).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        guard.push(ev);
        if guard.needs_agent() {
            self.start_agent(&shared, &mut guard);
        } else if guard.status() == Status::Finished {
            self.save(&guard);
        }
        Ok(SessionView::of(&guard))
    }

    /// Blocks until the agent is not thinking, or the timeout passes.
    pub fn wait_idle(&self, id: Uuid, timeout: Duration) -> Result<SessionView, ServiceError> {
        let shared = self.get(id)?;
        let deadline = Instant::now() + timeout;
        let mut guard = shared.0.lock().expect("session lock");
        while guard.status() == Status::AgentThinking {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                break;
            }
            guard = shared.1.wait_timeout(guard, left).expect("session lock").0;
        }
        Ok(SessionView::of(&guard))
    }

    fn start_agent(&self, shared: &Shared, session: &mut Session) {
        let mut agent = session.agent.take().expect("agent is idle");
        let state = session.state;
        let shared = shared.clone();
        let manager = self.clone();
        std::thread::spawn(move || {
            let outcome = agent.choose_move(&state);
            let (lock, idle) = &*shared;
            let mut s = lock.lock().expect("session lock");
            s.agent = Some(agent);
            match outcome {
                Ok(mv) => {
                    s.state = s.state.apply_move(mv).expect("agent moves are legal");
                    s.last_agent_move = Some(mv);
                    s.push(Event::Place(mv));
                    // The agent settles its own removals and graduations.
                    while !s.state.is_terminal() && s.state.phase() != Phase::Placement {
                        let choice = border_choice(&s.state.pending_choices(), s.state.board());
                        s.state = s.state.resolve_decision(choice).expect("pending choice");
                        s.push(Event::Decide(choice));
                    }
                }
                Err(e) => s.error = Some(format!("agent failed: {e}")),
            }
            if s.status() == Status::Finished {
                manager.save(&s);
            }
            idle.notify_all();
        });
    }

    fn save(&self, session: &Session) {
        if let Some(dir) = &self.records_dir {
            let path = dir.join(format!("{}.json", session.id));
            if let Err(e) = std::fs::create_dir_all(dir.as_path())
                .and_then(|_| std::fs::write(&path, session.record.to_json()))
            {
                eprintln!("cannot write record {}: {e}", path.display());
            }
        }
    }
}

fn rand_seed() -> u64 {
    let id = Uuid::new_v4();
    let (hi, lo) = id.as_u64_pair();
    hi ^ lo
}
