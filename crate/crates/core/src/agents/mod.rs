//! Game-playing agents.
//!
//! Every agent is a function of the observed state, its configuration and
//! the per-turn seed, spending at most the given [`BudgetMeter`] on
//! forward-model action applications. Planning agents first determinize
//! the state from their own point of view so they never read hidden cards.

mod bmrh;
mod evolve;
mod mcts;
mod osla;
mod rnd;
mod srh;

use std::fmt;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Action, GameState};
use crate::seeds;
use crate::valuefn::{BudgetMeter, ValueError, ValueFunction};

pub use bmrh::{branching_mutation, mutation_point, Bmrh, BmrhConfig, Mutation, MutationPoint, TieBreak};
pub use mcts::{ucb_select, ChildStats, Mcts, MctsConfig, MctsTrace};
pub use osla::Osla;
pub use rnd::Rnd;
pub use srh::{decode_genome, Srh, SrhConfig};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("bad hyperparameters for {kind}: {message}")]
    Hyperparameters { kind: AgentKind, message: String },
    #[error(transparent)]
    Value(#[from] ValueError),
}

pub trait Agent: Send {
    /// Chooses a legal action for the player to move in `state`.
    fn act(&mut self, state: &GameState, meter: &mut BudgetMeter, seed: u64) -> Action;

    /// Forgets anything carried between turns.
    fn new_game(&mut self) {}
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AgentKind {
    Rnd,
    Osla,
    Bmrh,
    Srh,
    Mcts,
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AgentKind::Rnd => "RND",
            AgentKind::Osla => "OSLA",
            AgentKind::Bmrh => "BMRH",
            AgentKind::Srh => "SRH",
            AgentKind::Mcts => "MCTS",
        };
        f.write_str(s)
    }
}

fn default_vf() -> serde_json::Value {
    serde_json::Value::String("score".into())
}

/// Serialised agent description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub kind: AgentKind,
    #[serde(default = "default_vf")]
    pub value_function: serde_json::Value,
    #[serde(default)]
    pub hyperparameters: serde_json::Map<String, serde_json::Value>,
    #[serde(default)]
    pub seed: u64,
    /// Display name; defaults to the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl AgentSpec {
    pub fn new(kind: AgentKind) -> Self {
        AgentSpec { kind, value_function: default_vf(), hyperparameters: Default::default(), seed: 0, name: None }
    }

    pub fn with_value_function(mut self, vf: &ValueFunction) -> Self {
        self.value_function = vf.to_json_value();
        self
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.to_string())
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Builds the agent; relative EF paths resolve against `base`.
    pub fn build(&self, base: Option<&Path>) -> Result<Box<dyn Agent>, AgentError> {
        let vf = ValueFunction::from_json_value(&self.value_function, base)?;
        let hp = serde_json::Value::Object(self.hyperparameters.clone());
        let bad = |e: serde_json::Error| AgentError::Hyperparameters { kind: self.kind, message: e.to_string() };
        let agent: Box<dyn Agent> = match self.kind {
            AgentKind::Rnd => {
                if !self.hyperparameters.is_empty() {
                    return Err(AgentError::Hyperparameters { kind: self.kind, message: "RND takes none".into() });
                }
                Box::new(Rnd::new(self.seed))
            }
            AgentKind::Osla => {
                if !self.hyperparameters.is_empty() {
                    return Err(AgentError::Hyperparameters { kind: self.kind, message: "OSLA takes none".into() });
                }
                Box::new(Osla::new(vf, self.seed))
            }
            AgentKind::Bmrh => {
                let cfg = BmrhConfig::from_map(&self.hyperparameters)
                    .map_err(|message| AgentError::Hyperparameters { kind: self.kind, message })?;
                Box::new(Bmrh::new(cfg, vf, self.seed))
            }
            AgentKind::Srh => {
                let cfg: SrhConfig = serde_json::from_value(hp).map_err(bad)?;
                cfg.validate().map_err(|message| AgentError::Hyperparameters { kind: self.kind, message })?;
                Box::new(Srh::new(cfg, vf, self.seed))
            }
            AgentKind::Mcts => {
                let cfg: MctsConfig = serde_json::from_value(hp).map_err(bad)?;
                cfg.validate().map_err(|message| AgentError::Hyperparameters { kind: self.kind, message })?;
                Box::new(Mcts::new(cfg, vf, self.seed))
            }
        };
        Ok(agent)
    }
}

/// Per-turn generator: the caller's seed mixed with the agent's own.
pub(crate) fn turn_rng(agent_seed: u64, seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seeds::derive(seed, &[agent_seed]))
}

/// The planner's view of `state`: hidden information reshuffled.
pub(crate) fn observe(state: &GameState, rng: &mut ChaCha8Rng) -> GameState {
    let mut view = state.clone();
    view.determinize(state.current_player, rng);
    view
}

/// Falls back to a sampled action if a planner's choice is not playable.
pub(crate) fn ensure_legal(state: &GameState, action: Action, rng: &mut ChaCha8Rng) -> Action {
    if state.is_legal(&action) {
        action
    } else {
        state.sample_action_with(rng)
    }
}

/// True when the only legal move is to pass, so planning is pointless.
pub(crate) fn forced_pass(state: &GameState) -> bool {
    state.legal_kinds().contains(crate::engine::ActionKind::Pass)
}
