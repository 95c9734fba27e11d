use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ValueError, ValueFunction};
use crate::engine::{Action, GameState};
use crate::events::{accumulate, Event};

/// Counts forward-model action applications against a per-turn budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetMeter {
    budget: u64,
    used: u64,
}

impl BudgetMeter {
    pub fn new(budget: u64) -> Self {
        BudgetMeter { budget, used: 0 }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.budget - self.used
    }

    pub fn is_exhausted(&self) -> bool {
        self.used >= self.budget
    }

    /// Takes one unit; false (and no change) when none are left.
    pub fn try_spend(&mut self) -> bool {
        if self.is_exhausted() {
            return false;
        }
        self.used += 1;
        true
    }
}

/// What opponents do between the planning player's simulated moves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpponentModel {
    /// Uniformly sampled legal actions; each costs one budget unit.
    #[default]
    Random,
    /// Opponents forfeit their turns at no cost.
    Passing,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalConfig {
    pub opponent: OpponentModel,
    /// Weight of the i-th own step's value increment is `discount^i`.
    pub discount: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { opponent: OpponentModel::Random, discount: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SequenceValue {
    pub value: f64,
    /// Own actions actually simulated.
    pub played: usize,
    /// True if the budget ran out before the sequence was finished.
    pub exhausted: bool,
}

/// A simulation from a copied root, accumulating the planning player's
/// value as own actions are played. Opponent turns are filled in lazily,
/// just before the next own action, so a sequence never pays for a
/// trailing opponent move.
pub struct Rollout<'v> {
    state: GameState,
    player: usize,
    vf: &'v ValueFunction,
    cfg: EvalConfig,
    theta: Vec<f64>,
    base_score: u32,
    events: Vec<Event>,
    steps: usize,
    total: f64,
    prev: f64,
    weight: f64,
}

impl<'v> Rollout<'v> {
    pub fn new(root: &GameState, vf: &'v ValueFunction, cfg: EvalConfig) -> Self {
        let features = vf.as_event().map_or(0, |f| f.feature_count());
        let mut r = Rollout {
            state: root.clone(),
            player: root.current_player,
            vf,
            cfg,
            theta: vec![0.0; features],
            base_score: 0,
            events: Vec::with_capacity(32),
            steps: 0,
            total: 0.0,
            prev: 0.0,
            weight: 1.0,
        };
        r.restart();
        r
    }

    /// Starts over from `root` reusing the allocations.
    pub fn reset(&mut self, root: &GameState) {
        self.state.clone_from(root);
        self.player = root.current_player;
        self.restart();
    }

    fn restart(&mut self) {
        self.theta.iter_mut().for_each(|t| *t = 0.0);
        self.base_score = self.state.score(self.player);
        self.steps = 0;
        self.total = 0.0;
        self.prev = 0.0;
        self.weight = 1.0;
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn features(&self) -> &[f64] {
        &self.theta
    }

    pub fn is_over(&self) -> bool {
        self.state.is_terminal()
    }

    /// Plays opponent turns until the planning player is to move. False if
    /// the game ended or the budget ran out on the way.
    pub fn advance<R: Rng + ?Sized>(&mut self, meter: &mut BudgetMeter, rng: &mut R) -> bool {
        while !self.state.is_terminal() && self.state.current_player != self.player {
            match self.cfg.opponent {
                OpponentModel::Passing => self.state.skip_turn().expect("not terminal"),
                OpponentModel::Random => {
                    if !meter.try_spend() {
                        return false;
                    }
                    let a = self.state.sample_action_with(rng);
                    self.events.clear();
                    self.state.apply_action_into(a, &mut self.events).expect("sampled action is legal");
                }
            }
        }
        !self.state.is_terminal()
    }

    /// Plays one own action: `proposed` if it is legal at this point,
    /// otherwise a freshly sampled one. Returns the action played, or
    /// `None` if the game ended or the budget ran out first.
    pub fn step<R: Rng + ?Sized>(&mut self, proposed: Option<&Action>, meter: &mut BudgetMeter, rng: &mut R) -> Option<Action> {
        if !self.advance(meter, rng) || !meter.try_spend() {
            return None;
        }
        let action = match proposed {
            Some(a) if self.state.is_legal(a) => *a,
            _ => self.state.sample_action_with(rng),
        };
        self.events.clear();
        self.state.apply_action_into(action, &mut self.events).expect("action checked legal");
        if let ValueFunction::Event(f) = self.vf {
            accumulate(&self.events, self.player, f.mapping(), &mut self.theta);
        }
        self.steps += 1;
        if self.cfg.discount != 1.0 {
            let v = self.current_value();
            self.total += self.weight * (v - self.prev);
            self.prev = v;
            self.weight *= self.cfg.discount;
        }
        Some(action)
    }

    fn current_value(&self) -> f64 {
        match self.vf {
            ValueFunction::Score => f64::from(self.state.score(self.player)) - f64::from(self.base_score),
            ValueFunction::Event(f) => f.value_unchecked(&self.theta),
        }
    }

    /// Value of the own actions played so far.
    pub fn value(&self) -> f64 {
        if self.cfg.discount == 1.0 {
            self.current_value()
        } else {
            self.total
        }
    }
}

/// Plays `seq` for the player to move in `state` on a copy of the state.
/// Actions that are illegal when their turn comes are replaced in `seq`
/// by sampled legal ones. `state` itself is never touched.
pub fn evaluate_sequence<R: Rng + ?Sized>(
    state: &GameState,
    seq: &mut [Action],
    vf: &ValueFunction,
    cfg: EvalConfig,
    meter: &mut BudgetMeter,
    rng: &mut R,
) -> Result<SequenceValue, ValueError> {
    if state.is_terminal() {
        return Err(ValueError::Terminal);
    }
    if meter.is_exhausted() {
        return Err(ValueError::BudgetExhausted);
    }
    let mut r = Rollout::new(state, vf, cfg);
    let mut exhausted = false;
    for a in seq.iter_mut() {
        if r.is_over() {
            break;
        }
        match r.step(Some(a), meter, rng) {
            Some(played) => *a = played,
            None => {
                exhausted = !r.is_over();
                break;
            }
        }
    }
    Ok(SequenceValue { value: r.value(), played: r.steps(), exhausted })
}
