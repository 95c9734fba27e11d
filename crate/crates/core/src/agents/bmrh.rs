use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::evolve::{evolve, Built, Origin, Schedule};
use super::{ensure_legal, forced_pass, observe, turn_rng, Agent};
use crate::engine::{Action, GameState};
use crate::ntbea::SearchSpace;
use crate::valuefn::{BudgetMeter, EvalConfig, OpponentModel, Rollout, ValueFunction};

/// How the branching point of a mutation is drawn from `0..len`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MutationPoint {
    Uniform,
    /// Counted back from the last position: the point is `len - 1 - k` with
    /// `k` geometric with success probability `p`, truncated to the sequence.
    /// Higher `p` keeps more of the parent.
    Geometric(f64),
}

impl fmt::Display for MutationPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MutationPoint::Uniform => f.write_str("uniform"),
            MutationPoint::Geometric(p) => write!(f, "geometric({p})"),
        }
    }
}

impl FromStr for MutationPoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "uniform" {
            return Ok(MutationPoint::Uniform);
        }
        let p = s
            .strip_prefix("geometric(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|x| x.parse::<f64>().ok())
            .ok_or_else(|| format!("unknown mutation point distribution {s:?}"))?;
        if !(p > 0.0 && p <= 1.0) {
            return Err(format!("geometric parameter {p} outside (0, 1]"));
        }
        Ok(MutationPoint::Geometric(p))
    }
}

impl Serialize for MutationPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MutationPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    /// The earlier candidate wins.
    #[default]
    First,
    Randomized,
}

/// Branching-mutation rolling horizon settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct BmrhConfig {
    pub sequence_length: usize,
    pub population_size: usize,
    pub elite_count: usize,
    #[serde(rename = "mutationPointDistribution")]
    pub mutation_point: MutationPoint,
    pub offspring_per_parent: usize,
    pub shift_buffer: bool,
    pub evaluations_per_sequence: usize,
    pub value_discount: f64,
    pub opponent_model: OpponentModel,
    pub tie_break: TieBreak,
}

impl Default for BmrhConfig {
    fn default() -> Self {
        BmrhConfig {
            sequence_length: 2,
            population_size: 10,
            elite_count: 2,
            mutation_point: MutationPoint::Uniform,
            offspring_per_parent: 2,
            shift_buffer: true,
            evaluations_per_sequence: 1,
            value_discount: 1.0,
            opponent_model: OpponentModel::Random,
            tie_break: TieBreak::First,
        }
    }
}

impl BmrhConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.sequence_length == 0 {
            return Err("sequenceLength must be at least 1".into());
        }
        if self.elite_count == 0 || self.population_size < self.elite_count {
            return Err("need 1 <= eliteCount <= populationSize".into());
        }
        if self.offspring_per_parent == 0 || self.evaluations_per_sequence == 0 {
            return Err("offspringPerParent and evaluationsPerSequence must be positive".into());
        }
        if !(self.value_discount > 0.0 && self.value_discount <= 1.0) {
            return Err("valueDiscount must lie in (0, 1]".into());
        }
        Ok(())
    }

    /// Reads a hyperparameter map, lowering `eliteCount` to the population
    /// size where a search space allows both to be drawn independently.
    pub fn from_map(map: &serde_json::Map<String, serde_json::Value>) -> Result<Self, String> {
        let mut cfg: BmrhConfig = serde_json::from_value(serde_json::Value::Object(map.clone())).map_err(|e| e.to_string())?;
        cfg.elite_count = cfg.elite_count.min(cfg.population_size.max(1));
        cfg.validate()?;
        Ok(cfg)
    }

    /// The shipped ten-dimensional hyperparameter space.
    pub fn search_space() -> SearchSpace {
        SearchSpace::from_json(include_str!("../../data/bmrh_space.json")).expect("shipped space is valid")
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig { opponent: self.opponent_model, discount: self.value_discount }
    }
}

pub fn mutation_point<R: Rng + ?Sized>(dist: MutationPoint, len: usize, rng: &mut R) -> usize {
    assert!(len > 0);
    match dist {
        MutationPoint::Uniform => rng.gen_range(0..len),
        MutationPoint::Geometric(p) => loop {
            let mut k = 0;
            while rng.gen::<f64>() >= p {
                k += 1;
                if k >= len {
                    break;
                }
            }
            if k < len {
                return len - 1 - k;
            }
        },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mutation {
    pub child: Vec<Action>,
    pub value: f64,
    pub point: usize,
    /// Budget ran out mid-roll; the tail is padded with `Pass`.
    pub exhausted: bool,
}

/// Copies `parent` up to `point` while playing it (resampling any action
/// that has become illegal), then extends with fresh legal actions while
/// rolling the state forward. The roll also yields the child's value.
/// With no parent every position is fresh.
pub(crate) fn roll_child<R: Rng + ?Sized>(
    rollout: &mut Rollout<'_>,
    root: &GameState,
    parent: Option<&[Action]>,
    point: usize,
    len: usize,
    meter: &mut BudgetMeter,
    rng: &mut R,
) -> Mutation {
    rollout.reset(root);
    let mut child = Vec::with_capacity(len);
    let mut exhausted = false;
    for i in 0..len {
        if exhausted || rollout.is_over() {
            child.push(Action::Pass);
            continue;
        }
        let proposed = if i < point { parent.and_then(|p| p.get(i)) } else { None };
        match rollout.step(proposed, meter, rng) {
            Some(a) => child.push(a),
            None => {
                exhausted = !rollout.is_over();
                child.push(Action::Pass);
            }
        }
    }
    Mutation { child, value: rollout.value(), point, exhausted }
}

/// One branching mutation of `parent` from state `s`, with the point drawn
/// from `dist`.
pub fn branching_mutation<R: Rng + ?Sized>(
    s: &GameState,
    parent: &[Action],
    dist: MutationPoint,
    vf: &ValueFunction,
    cfg: EvalConfig,
    meter: &mut BudgetMeter,
    rng: &mut R,
) -> Mutation {
    let point = mutation_point(dist, parent.len(), rng);
    let mut rollout = Rollout::new(s, vf, cfg);
    roll_child(&mut rollout, s, Some(parent), point, parent.len(), meter, rng)
}

/// Branching mutation rolling horizon agent.
#[derive(Clone, Debug)]
pub struct Bmrh {
    cfg: BmrhConfig,
    vf: ValueFunction,
    seed: u64,
    buffer: Option<Vec<Action>>,
}

impl Bmrh {
    pub fn new(cfg: BmrhConfig, vf: ValueFunction, seed: u64) -> Self {
        Bmrh { cfg, vf, seed, buffer: None }
    }

    pub fn config(&self) -> &BmrhConfig {
        &self.cfg
    }

    /// Best sequence found for the player to move.
    pub fn plan(&mut self, state: &GameState, meter: &mut BudgetMeter, seed: u64) -> Vec<Action> {
        let mut rng = turn_rng(self.seed, seed);
        let view = observe(state, &mut rng);
        let cfg = &self.cfg;
        let len = cfg.sequence_length;
        let mut rollout = Rollout::new(&view, &self.vf, cfg.eval_config());
        let shifted = if cfg.shift_buffer { self.buffer.take() } else { None };
        let sched = Schedule {
            population: cfg.population_size,
            elites: cfg.elite_count,
            offspring: cfg.offspring_per_parent,
            tie_break: cfg.tie_break,
        };
        let best = evolve(sched, shifted.as_ref(), &mut rng, |origin, rng| {
            let m = match origin {
                Origin::Fresh => roll_child(&mut rollout, &view, None, 0, len, meter, rng),
                Origin::Shifted(prev) => {
                    let tail: Vec<Action> = prev.iter().skip(1).copied().collect();
                    roll_child(&mut rollout, &view, Some(&tail), tail.len(), len, meter, rng)
                }
                Origin::Child(parent) => {
                    let point = mutation_point(cfg.mutation_point, len, rng);
                    roll_child(&mut rollout, &view, Some(parent), point, len, meter, rng)
                }
            };
            if m.exhausted {
                return Built { genome: m.child, fitness: m.value, complete: false };
            }
            let mut total = m.value;
            let mut runs = 1;
            for _ in 1..cfg.evaluations_per_sequence {
                let again = roll_child(&mut rollout, &view, Some(&m.child), len, len, meter, rng);
                if again.exhausted {
                    break;
                }
                total += again.value;
                runs += 1;
            }
            Built { genome: m.child, fitness: total / runs as f64, complete: true }
        });
        let best = best.unwrap_or_else(|| vec![Action::Pass; len]);
        if cfg.shift_buffer {
            self.buffer = Some(best.clone());
        }
        best
    }
}

impl Agent for Bmrh {
    fn act(&mut self, state: &GameState, meter: &mut BudgetMeter, seed: u64) -> Action {
        if forced_pass(state) {
            self.buffer = None;
            return Action::Pass;
        }
        let seq = self.plan(state, meter, seed);
        let mut rng = turn_rng(self.seed ^ 0x5eed, seed);
        ensure_legal(state, seq[0], &mut rng)
    }

    fn new_game(&mut self) {
        self.buffer = None;
    }
}
