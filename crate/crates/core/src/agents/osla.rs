use super::{ensure_legal, forced_pass, observe, turn_rng, Agent};
use crate::engine::{Action, GameState};
use crate::valuefn::{BudgetMeter, EvalConfig, Rollout, ValueFunction};

/// One-step look-ahead: samples candidate actions, plays each once on a
/// copy and keeps the best. Ties go to the first candidate found.
#[derive(Clone, Debug)]
pub struct Osla {
    vf: ValueFunction,
    seed: u64,
}

impl Osla {
    pub fn new(vf: ValueFunction, seed: u64) -> Self {
        Osla { vf, seed }
    }
}

impl Agent for Osla {
    fn act(&mut self, state: &GameState, meter: &mut BudgetMeter, seed: u64) -> Action {
        let mut rng = turn_rng(self.seed, seed);
        if forced_pass(state) {
            return Action::Pass;
        }
        let view = observe(state, &mut rng);
        let mut rollout = Rollout::new(&view, &self.vf, EvalConfig::default());
        let mut seen: Vec<Action> = Vec::new();
        let mut best: Option<(Action, f64)> = None;
        for _ in 0..meter.budget() {
            let a = view.sample_action_with(&mut rng);
            // one action from the root is deterministic, so repeats add nothing
            if seen.contains(&a) {
                continue;
            }
            seen.push(a);
            rollout.reset(&view);
            if rollout.step(Some(&a), meter, &mut rng).is_none() {
                break;
            }
            let v = rollout.value();
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((a, v));
            }
        }
        match best {
            Some((a, _)) => ensure_legal(state, a, &mut rng),
            None => state.sample_action_with(&mut rng),
        }
    }
}
