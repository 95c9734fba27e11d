//! Value functions for action sequences.
//!
//! An [`EventValueFunction`] maps the events a sequence raised to a feature
//! vector (type mapping plus per-player counts) and mixes the features with
//! a weight vector. [`ValueFunction::Score`] is the score-delta baseline.

mod mixer;
mod rollout;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{accumulate, Event, EventError, TypeMapping};

pub use mixer::{enumerate_monomials, eval_mixer, multiset_coefficient, required_weights, Mixer, MixerKind};
pub use rollout::{evaluate_sequence, BudgetMeter, EvalConfig, OpponentModel, Rollout, SequenceValue};

/// The discretised weight grid used by the tuner.
pub const WEIGHT_GRID: [f64; 11] = [-1.0, -0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Debug, Error)]
pub enum ValueError {
    #[error("{what}: expected length {expected}, got {got}")]
    Length { expected: usize, got: usize, what: &'static str },
    #[error("bad mixer: {0}")]
    Mixer(String),
    #[error("weight {index} is not finite")]
    NonFinite { index: usize },
    #[error("unknown value function preset {0:?}")]
    UnknownPreset(String),
    #[error("no simulation budget left")]
    BudgetExhausted,
    #[error("state is terminal")]
    Terminal,
    #[error(transparent)]
    Event(#[from] EventError),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn zeros(n: usize) -> Self {
        WeightVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn validate(&self) -> Result<(), ValueError> {
        match self.0.iter().position(|w| !w.is_finite()) {
            Some(index) => Err(ValueError::NonFinite { index }),
            None => Ok(()),
        }
    }
}

impl From<Vec<f64>> for WeightVector {
    fn from(v: Vec<f64>) -> Self {
        WeightVector(v)
    }
}

/// h_w(E) = f_w(σ(E)).
#[derive(Clone, Debug, PartialEq)]
pub struct EventValueFunction {
    mapping: TypeMapping,
    mixer: Mixer,
    weights: WeightVector,
}

impl EventValueFunction {
    pub fn new(mapping: TypeMapping, kind: MixerKind, weights: WeightVector) -> Result<Self, ValueError> {
        let mixer = Mixer { kind, features: mapping.group_count() };
        mixer.validate()?;
        weights.validate()?;
        let need = required_weights(&mixer);
        if weights.len() != need {
            return Err(ValueError::Length { expected: need, got: weights.len(), what: "weights" });
        }
        Ok(EventValueFunction { mapping, mixer, weights })
    }

    /// All-zero weights for the given mapping and mixer.
    pub fn zeros(mapping: TypeMapping, kind: MixerKind) -> Result<Self, ValueError> {
        let n = required_weights(&Mixer { kind, features: mapping.group_count() });
        EventValueFunction::new(mapping, kind, WeightVector::zeros(n))
    }

    pub fn mapping(&self) -> &TypeMapping {
        &self.mapping
    }

    pub fn mixer(&self) -> &Mixer {
        &self.mixer
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn with_weights(&self, weights: WeightVector) -> Result<Self, ValueError> {
        EventValueFunction::new(self.mapping, self.mixer.kind, weights)
    }

    pub fn feature_count(&self) -> usize {
        self.mixer.features
    }

    /// Mixes an already synthesised feature vector.
    pub fn value(&self, theta: &[f64]) -> Result<f64, ValueError> {
        eval_mixer(&self.mixer, &self.weights.0, theta)
    }

    pub(crate) fn value_unchecked(&self, theta: &[f64]) -> f64 {
        mixer::eval_unchecked(&self.mixer, &self.weights.0, theta)
    }

    pub fn features(&self, events: &[Event], player: usize) -> Vec<f64> {
        let mut theta = vec![0.0; self.feature_count()];
        accumulate(events, player, &self.mapping, &mut theta);
        theta
    }

    /// Value of an event list from `player`'s point of view.
    pub fn value_of_events(&self, events: &[Event], player: usize) -> f64 {
        self.value_unchecked(&self.features(events, player))
    }

    pub fn from_json(text: &str) -> Result<Self, ValueError> {
        let file: EfFile = serde_json::from_str(text)?;
        file.into_function()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&EfFile::from(self)).expect("serialisable")
    }

    pub fn load(path: &Path) -> Result<Self, ValueError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ValueError::Io { path: path.display().to_string(), source })?;
        EventValueFunction::from_json(&text)
    }

    /// Shipped weight presets: `lin_hc_star` and `lin_id_star`.
    pub fn preset(name: &str) -> Result<Self, ValueError> {
        let text = match name {
            "lin_hc_star" => include_str!("../../data/ef/lin_hc_star.json"),
            "lin_id_star" => include_str!("../../data/ef/lin_id_star.json"),
            other => return Err(ValueError::UnknownPreset(other.to_string())),
        };
        EventValueFunction::from_json(text)
    }

    pub const PRESETS: [&'static str; 2] = ["lin_hc_star", "lin_id_star"];
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum MappingRef {
    Named(String),
    Table(Vec<i64>),
}

/// On-disk form of an event-value function.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EfFile {
    mapping: MappingRef,
    mixer: MixerKind,
    weights: WeightVector,
}

impl EfFile {
    fn into_function(self) -> Result<EventValueFunction, ValueError> {
        let mapping = match self.mapping {
            MappingRef::Named(name) => TypeMapping::named(&name)?,
            MappingRef::Table(table) => TypeMapping::from_table(&table)?,
        };
        EventValueFunction::new(mapping, self.mixer, self.weights)
    }
}

impl From<&EventValueFunction> for EfFile {
    fn from(f: &EventValueFunction) -> Self {
        let mapping = match f.mapping.name() {
            Some(name) => MappingRef::Named(name.to_string()),
            None => MappingRef::Table(f.mapping.table().iter().map(|&g| i64::from(g)).collect()),
        };
        EfFile { mapping, mixer: f.mixer.kind, weights: f.weights.clone() }
    }
}

/// Either the score-delta baseline or an event-value function.
#[derive(Clone, Debug, PartialEq)]
pub enum ValueFunction {
    Score,
    Event(EventValueFunction),
}

impl ValueFunction {
    /// Resolves `"score"`, a preset name, an inline EF object, or a path to
    /// an EF file (relative to `base` when given).
    pub fn from_json_value(v: &serde_json::Value, base: Option<&Path>) -> Result<Self, ValueError> {
        match v {
            serde_json::Value::String(s) if s == "score" => Ok(ValueFunction::Score),
            serde_json::Value::String(s) if EventValueFunction::PRESETS.contains(&s.as_str()) => {
                Ok(ValueFunction::Event(EventValueFunction::preset(s)?))
            }
            serde_json::Value::String(s) => {
                let path = match base {
                    Some(b) => b.join(s),
                    None => Path::new(s).to_path_buf(),
                };
                Ok(ValueFunction::Event(EventValueFunction::load(&path)?))
            }
            other => {
                let file: EfFile = serde_json::from_value(other.clone())?;
                Ok(ValueFunction::Event(file.into_function()?))
            }
        }
    }

    /// Inline JSON form, the inverse of [`from_json_value`](Self::from_json_value).
    pub fn to_json_value(&self) -> serde_json::Value {
        match self {
            ValueFunction::Score => serde_json::Value::String("score".into()),
            ValueFunction::Event(f) => serde_json::to_value(EfFile::from(f)).expect("serialisable"),
        }
    }

    pub fn as_event(&self) -> Option<&EventValueFunction> {
        match self {
            ValueFunction::Event(f) => Some(f),
            ValueFunction::Score => None,
        }
    }
}
