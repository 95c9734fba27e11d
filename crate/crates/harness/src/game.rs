use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use r2_core::agents::AgentSpec;
use r2_core::engine::{standard_cards, standard_nobles, GameParams, GameState, Outcome};
use r2_core::seeds;
use r2_core::valuefn::BudgetMeter;

use crate::HarnessError;

/// Forward-model actions each agent may spend per turn.
pub const DEFAULT_BUDGET: u64 = 1000;

/// One finished game.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    pub game: usize,
    /// Free-form label of the batch the game belongs to.
    pub group: String,
    pub seed: u64,
    /// Agent label per seat.
    pub seats: Vec<String>,
    pub points: Vec<u32>,
    /// `None` when the turn cap ended the game.
    pub winner: Option<usize>,
    pub turns: u32,
    pub capped: bool,
    /// Most forward-model actions any agent spent on one turn.
    pub max_spent: u64,
    /// Not written to CSV, so reruns stay byte-identical.
    pub elapsed: Duration,
}

impl MatchResult {
    /// 1 for a win, 0.5 for a capped game, 0 otherwise.
    pub fn score(&self, seat: usize) -> f64 {
        match self.winner {
            Some(w) if w == seat => 1.0,
            Some(_) => 0.0,
            None => 0.5,
        }
    }
}

/// Plays one game between `agents`, seated in order. The setup and every
/// turn seed are derived from `seed`.
pub fn run_game(agents: &[AgentSpec], params: &GameParams, seed: u64, budget: u64, base: Option<&Path>) -> Result<MatchResult, HarnessError> {
    if agents.len() != params.num_players() {
        return Err(HarnessError::Spec(format!("{} agents for a {}-player game", agents.len(), params.num_players())));
    }
    let start = Instant::now();
    let mut players = agents.iter().map(|a| a.build(base)).collect::<Result<Vec<_>, _>>()?;
    for p in &mut players {
        p.new_game();
    }
    let mut state = GameState::new_game(*params, &standard_cards(), &standard_nobles(), seeds::derive(seed, &[0]))?;
    let mut max_spent = 0;
    while !state.is_terminal() {
        let me = state.current_player;
        let mut meter = BudgetMeter::new(budget);
        let action = players[me].act(&state, &mut meter, seeds::derive(seed, &[1, u64::from(state.tick)]));
        if meter.used() > budget {
            return Err(HarnessError::Budget { agent: agents[me].label(), used: meter.used(), budget });
        }
        max_spent = max_spent.max(meter.used());
        if !state.is_legal(&action) {
            return Err(HarnessError::Illegal { agent: agents[me].label(), action: format!("{action:?}") });
        }
        state.apply_action(action)?;
    }
    let outcome = state.winner()?;
    Ok(MatchResult {
        game: 0,
        group: String::new(),
        seed,
        seats: agents.iter().map(AgentSpec::label).collect(),
        points: (0..state.num_players()).map(|p| state.score(p)).collect(),
        winner: match outcome {
            Outcome::Winner(w) => Some(w),
            Outcome::Capped => None,
        },
        turns: state.tick,
        capped: outcome == Outcome::Capped,
        max_spent,
        elapsed: start.elapsed(),
    })
}

/// Writes `results.csv` rows; seat columns cover the widest game.
pub fn write_results<W: Write>(results: &[MatchResult], out: W) -> Result<(), HarnessError> {
    let seats = results.iter().map(|r| r.seats.len()).max().unwrap_or(2);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["game".to_string(), "group".into(), "seed".into()];
    header.extend((0..seats).map(|i| format!("seat{i}")));
    header.extend((0..seats).map(|i| format!("points{i}")));
    header.extend(["winner", "turns", "capped", "max_spent"].map(String::from));
    w.write_record(&header)?;
    for r in results {
        let mut row = vec![r.game.to_string(), r.group.clone(), r.seed.to_string()];
        row.extend((0..seats).map(|i| r.seats.get(i).cloned().unwrap_or_default()));
        row.extend((0..seats).map(|i| r.points.get(i).map(u32::to_string).unwrap_or_default()));
        row.push(r.winner.map(|w| w.to_string()).unwrap_or_default());
        row.push(r.turns.to_string());
        row.push(u8::from(r.capped).to_string());
        row.push(r.max_spent.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
