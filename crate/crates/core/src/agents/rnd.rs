use super::{turn_rng, Agent};
use crate::engine::{Action, GameState};
use crate::valuefn::BudgetMeter;

/// Plays uniformly sampled legal actions. Spends no budget.
#[derive(Clone, Debug, Default)]
pub struct Rnd {
    seed: u64,
}

impl Rnd {
    pub fn new(seed: u64) -> Self {
        Rnd { seed }
    }
}

impl Agent for Rnd {
    fn act(&mut self, state: &GameState, _meter: &mut BudgetMeter, seed: u64) -> Action {
        state.sample_action_with(&mut turn_rng(self.seed, seed))
    }
}
