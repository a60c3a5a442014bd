//! Match configuration files (TOML).
//!
//! ```toml
//! games = 50
//! seed = 1
//! seats = "alternate"   # or "fixed"
//! jobs = 4
//! out = "results/sep-vs-vanilla"
//!
//! [budget]
//! ms = 250              # or: iters = 400
//!
//! [params]              # shared by both agents
//! k = 20
//! m = 5
//! discount = 0.9
//!
//! [weights]             # shared by both agents
//! center = 2.0
//!
//! [agent_a]
//! kind = "mcts+"
//! inject = "SEP"
//!
//! [agent_b]
//! kind = "vanilla"
//! [agent_b.params]      # per-agent override of the shared table
//! c_explore = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::arena::{MatchSpec, SeatPolicy};
use crate::heuristic::HeuristicWeights;
use crate::search::{AgentConfig, AgentKind, Budget, Injections, SearchParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSection {
    pub kind: String,
    /// Solver injections for `kind = "mcts+"`: any of S, E, P.
    pub inject: Option<String>,
    pub params: Option<toml::Table>,
    pub weights: Option<toml::Table>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchConfig {
    pub games: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub seats: SeatPolicy,
    #[serde(default = "one")]
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub budget: Option<Budget>,
    #[serde(default)]
    pub params: toml::Table,
    #[serde(default)]
    pub weights: toml::Table,
    pub agent_a: AgentSection,
    pub agent_b: AgentSection,
}

fn one() -> usize {
    1
}

fn merged<T: for<'de> Deserialize<'de>>(
    shared: &toml::Table,
    own: Option<&toml::Table>,
    what: &str,
) -> Result<T, ConfigError> {
    let mut table = shared.clone();
    if let Some(own) = own {
        table.extend(own.clone());
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Invalid(format!("{what}: {}", e.message())))
}

impl AgentSection {
    pub fn kind(&self) -> Result<AgentKind, ConfigError> {
        let kind: AgentKind = self
            .kind
            .parse()
            .map_err(|e| ConfigError::Invalid(format!("{e}")))?;
        match (kind, &self.inject) {
            (_, None) => Ok(kind),
            (AgentKind::MctsPlus(_), Some(letters)) => Injections::from_letters(letters)
                .map(AgentKind::MctsPlus)
                .ok_or_else(|| ConfigError::Invalid(format!("bad inject letters {letters:?}"))),
            (_, Some(_)) => Err(ConfigError::Invalid(format!(
                "inject only applies to mcts+ agents, not {kind}"
            ))),
        }
    }
}

impl MatchConfig {
    pub fn parse(text: &str) -> Result<MatchConfig, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<MatchConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        MatchConfig::parse(&text)
    }

    pub fn agent(&self, section: &AgentSection, name: &str) -> Result<AgentConfig, ConfigError> {
        let params: SearchParams = merged(
            &self.params,
            section.params.as_ref(),
            &format!("{name}.params"),
        )?;
        let weights: HeuristicWeights = merged(
            &self.weights,
            section.weights.as_ref(),
            &format!("{name}.weights"),
        )?;
        let cfg = AgentConfig {
            kind: section.kind()?,
            params,
            weights,
            seed: self.seed,
        };
        Ok(cfg)
    }

    pub fn to_spec(&self) -> Result<MatchSpec, ConfigError> {
        let spec = MatchSpec {
            agent_a: self.agent(&self.agent_a, "agent_a")?,
            agent_b: self.agent(&self.agent_b, "agent_b")?,
            games: self.games,
            seats: self.seats,
            base_seed: self.seed,
            budget: self.budget,
            jobs: self.jobs,
        };
        spec.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(spec)
    }
}
