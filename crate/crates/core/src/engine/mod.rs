//! Parameterized Splendor rules engine.
//!
//! [`GameState`] is the forward model: it can be cloned cheaply, moves are
//! applied in place, and every rule-driven change raises an
//! [`Event`](crate::events::Event) that is returned to the caller and
//! broadcast to attached loggers.

mod action;
mod cards;
mod legal;
mod params;
mod sample;
mod state;
mod tokens;

pub use action::{Action, ActionKind, KindSet};
pub use cards::{read_cards, read_nobles, standard_cards, standard_nobles, Card, Noble};
pub use params::{GameParams, DEFAULT_MAX_TURNS, TAKE_DIFFERENT_COUNT};
pub use state::{GameState, Outcome, PlayerState};
pub use tokens::{TokenBundle, TokenVector, MAX_SUITS};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("illegal action {0:?}")]
    IllegalAction(Action),
    #[error("game is over")]
    Terminal,
    #[error("game is not over")]
    NotTerminal,
    #[error("logger already attached")]
    LoggerAlreadyAttached,
    #[error("logger not attached")]
    UnknownLogger,
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
