//! Experiment runner: single games, head-to-head validation, round-robin
//! tournaments, multi-opponent games and NTBEA tuning campaigns, each
//! writing plain CSV results.
//!
//! Every game seed is derived from the master seed and the game's position
//! in the experiment, so results do not depend on scheduling or `--jobs`.

pub mod experiments;
pub mod game;
pub mod run;
pub mod spec;
pub mod stats;

use std::path::PathBuf;

use thiserror::Error;

pub use experiments::{delta, multi_opponent, play, round_robin, tune, validate, Table, TunePlan, TuneReport, TuneTarget};
pub use game::{run_game, write_results, MatchResult, DEFAULT_BUDGET};
pub use run::run_experiment;
pub use spec::{AgentRef, ExperimentKind, ExperimentSpec, Resolver, WeightTemplate};
pub use stats::{ci_bounds, Tally, WinRateTable};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad experiment: {0}")]
    Spec(String),
    #[error("{agent} played an illegal action {action}")]
    Illegal { agent: String, action: String },
    #[error("{agent} spent {used} of a {budget} budget")]
    Budget { agent: String, used: u64, budget: u64 },
    #[error(transparent)]
    Agent(#[from] r2_core::agents::AgentError),
    #[error(transparent)]
    Engine(#[from] r2_core::engine::EngineError),
    #[error(transparent)]
    Value(#[from] r2_core::valuefn::ValueError),
    #[error(transparent)]
    Event(#[from] r2_core::events::EventError),
    #[error(transparent)]
    Ntbea(#[from] r2_core::ntbea::NtbeaError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}: {1}")]
    File(PathBuf, std::io::Error),
}
