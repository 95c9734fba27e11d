use std::fs;
use std::path::{Path, PathBuf};

use r2_core::agents::AgentSpec;
use r2_core::engine::GameParams;
use r2_core::ntbea::NtbeaConfig;
use r2_core::valuefn::MixerKind;
use serde::{Deserialize, Serialize};

use crate::game::DEFAULT_BUDGET;
use crate::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Play,
    Tune,
    Validate,
    Roundrobin,
    #[serde(alias = "multi")]
    Multiopponent,
}

/// An agent given inline or as a path to an agent JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AgentRef {
    File(String),
    Inline(AgentSpec),
}

/// Event-value template whose weights are tuned alongside the agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightTemplate {
    /// `"hc"`, `"id"` or an explicit 18-entry table.
    pub mapping: serde_json::Value,
    pub mixer: MixerKind,
}

fn default_games() -> usize {
    100
}
fn default_budget() -> u64 {
    DEFAULT_BUDGET
}
fn default_opponents() -> usize {
    3
}
fn default_budgets() -> Vec<usize> {
    vec![50, 100, 200, 500, 1000, 10_000]
}
fn default_one() -> usize {
    1
}
fn default_validation() -> usize {
    1000
}

/// Experiment description read from JSON. Fields a kind does not use are
/// ignored by it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Must match the command when present.
    #[serde(default)]
    pub kind: Option<ExperimentKind>,
    /// Players for `play`, the pool for `roundrobin`, and the candidate
    /// (first entry) elsewhere.
    #[serde(default)]
    pub agents: Vec<AgentRef>,
    #[serde(default)]
    pub opponent: Option<AgentRef>,
    /// Game parameter file; standard rules for the right player count otherwise.
    #[serde(default)]
    pub params: Option<String>,
    /// Games for play/validate/multi, games per pair for roundrobin.
    #[serde(default = "default_games")]
    pub games: usize,
    /// Per-turn forward-model budget.
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default = "default_opponents")]
    pub num_opponents: usize,
    /// Two-player win percentage to compare a multi-opponent run against.
    #[serde(default)]
    pub baseline: Option<f64>,
    /// Tuning budgets in games.
    #[serde(default = "default_budgets")]
    pub budgets: Vec<usize>,
    #[serde(default = "default_one")]
    pub repetitions: usize,
    #[serde(default = "default_validation")]
    pub validation_games: usize,
    /// Validation opponent; the tuning opponent when absent.
    #[serde(default)]
    pub validation_opponent: Option<AgentRef>,
    /// Also tune event-value weights of this shape.
    #[serde(default)]
    pub weights: Option<WeightTemplate>,
    /// Agent hyperparameter space file; the shipped BMRH space otherwise.
    #[serde(default)]
    pub space: Option<String>,
    #[serde(default)]
    pub ntbea: NtbeaConfig,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        serde_json::from_value(serde_json::json!({ "kind": kind })).expect("defaults deserialise")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self, kind: ExperimentKind) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Spec(m.into()));
        if self.kind.is_some_and(|k| k != kind) {
            return bad("spec kind does not match the command");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1");
        }
        if self.games == 0 || self.budget == 0 {
            return bad("games and budget must be positive");
        }
        match kind {
            ExperimentKind::Play if self.agents.is_empty() => bad("play needs agents"),
            ExperimentKind::Roundrobin if self.agents.len() < 2 => bad("roundrobin needs at least two agents"),
            ExperimentKind::Validate | ExperimentKind::Multiopponent if self.agents.is_empty() => bad("needs a candidate agent"),
            ExperimentKind::Validate if self.agents.len() < 2 && self.opponent.is_none() => bad("validate needs an opponent"),
            ExperimentKind::Multiopponent if self.agents.len() < 2 && self.opponent.is_none() => bad("multi needs an opponent"),
            ExperimentKind::Multiopponent if self.num_opponents == 0 => bad("need at least one opponent"),
            ExperimentKind::Tune if self.agents.len() != 1 => bad("tune needs exactly one target agent"),
            ExperimentKind::Tune if self.opponent.is_none() => bad("tune needs an opponent"),
            ExperimentKind::Tune if self.budgets.is_empty() || self.budgets.contains(&0) => bad("budgets must be positive"),
            ExperimentKind::Tune if self.validation_games == 0 => bad("validation_games must be positive"),
            _ => Ok(()),
        }
    }
}

/// Resolves file references relative to the spec file's directory.
#[derive(Clone, Debug, Default)]
pub struct Resolver {
    pub base: Option<PathBuf>,
}

impl Resolver {
    pub fn new(base: Option<&Path>) -> Self {
        Resolver { base: base.map(Path::to_path_buf) }
    }

    pub fn path(&self, p: &str) -> PathBuf {
        match &self.base {
            Some(b) => b.join(p),
            None => PathBuf::from(p),
        }
    }

    /// Loads an agent; a file's own relative references resolve against
    /// the file's directory, so its value function path is made absolute.
    pub fn agent(&self, r: &AgentRef) -> Result<AgentSpec, HarnessError> {
        match r {
            AgentRef::Inline(spec) => Ok(self.anchor(spec.clone(), self.base.as_deref())),
            AgentRef::File(p) => {
                let path = self.path(p);
                let text = fs::read_to_string(&path).map_err(|e| HarnessError::File(path.clone(), e))?;
                let spec = AgentSpec::from_json(&text)?;
                Ok(self.anchor(spec, path.parent()))
            }
        }
    }

    fn anchor(&self, mut spec: AgentSpec, dir: Option<&Path>) -> AgentSpec {
        if let (serde_json::Value::String(s), Some(dir)) = (&spec.value_function, dir) {
            let is_named = s == "score" || r2_core::valuefn::EventValueFunction::PRESETS.contains(&s.as_str());
            if !is_named && Path::new(s).is_relative() {
                spec.value_function = serde_json::Value::String(dir.join(s).to_string_lossy().into_owned());
            }
        }
        spec
    }

    pub fn params(&self, file: Option<&str>, players: usize) -> Result<GameParams, HarnessError> {
        let params = match file {
            None => GameParams::standard(players as u32),
            Some(p) => {
                let path = self.path(p);
                let text = fs::read_to_string(&path).map_err(|e| HarnessError::File(path.clone(), e))?;
                GameParams::from_json(&text)?
            }
        };
        params.validate()?;
        if params.num_players() != players {
            return Err(HarnessError::Spec(format!("params are for {} players, experiment needs {players}", params.num_players())));
        }
        Ok(params)
    }
}
