use serde::{Deserialize, Serialize};

use super::{ensure_legal, forced_pass, observe, turn_rng, Agent};
use crate::engine::{Action, GameState};
use crate::valuefn::{BudgetMeter, EvalConfig, OpponentModel, Rollout, ValueFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct MctsConfig {
    pub exploration_constant: f64,
    /// Own decisions stored below the root.
    pub max_depth: usize,
    pub widening_base: f64,
    pub widening_exponent: f64,
    /// Random own actions played after leaving the tree.
    pub rollout_length: usize,
    pub opponent_model: OpponentModel,
}

impl Default for MctsConfig {
    fn default() -> Self {
        MctsConfig {
            exploration_constant: 1.0,
            max_depth: 3,
            widening_base: 2.0,
            widening_exponent: 0.5,
            rollout_length: 2,
            opponent_model: OpponentModel::Random,
        }
    }
}

impl MctsConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.exploration_constant >= 0.0) || !self.exploration_constant.is_finite() {
            return Err("explorationConstant must be finite and non-negative".into());
        }
        if self.max_depth == 0 {
            return Err("maxDepth must be at least 1".into());
        }
        if !(self.widening_base > 0.0) || !(self.widening_exponent >= 0.0) {
            return Err("wideningBase must be positive and wideningExponent non-negative".into());
        }
        Ok(())
    }

    /// Most children a node with `visits` visits may have.
    pub fn widening_cap(&self, visits: u32) -> usize {
        (self.widening_base * f64::from(visits).powf(self.widening_exponent)).ceil() as usize
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ChildStats {
    pub visits: u32,
    pub total: f64,
}

/// UCB1 over `children` with means rescaled by the running `[lo, hi]`
/// range of observed values. Unvisited children come first; ties go to
/// the lowest index.
pub fn ucb_select(children: &[ChildStats], parent_visits: u32, c: f64, lo: f64, hi: f64) -> Option<usize> {
    let span = hi - lo;
    let ln_n = f64::from(parent_visits.max(1)).ln();
    let mut best: Option<(usize, f64)> = None;
    for (i, ch) in children.iter().enumerate() {
        let score = if ch.visits == 0 {
            f64::INFINITY
        } else {
            let mean = ch.total / f64::from(ch.visits);
            let norm = if span > 0.0 { (mean - lo) / span } else { 0.0 };
            norm + c * (ln_n / f64::from(ch.visits)).sqrt()
        };
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i)
}

/// Root statistics after each iteration, for instrumented runs.
#[derive(Clone, Debug, Default)]
pub struct MctsTrace {
    pub root_visits: Vec<u32>,
    pub root_children: Vec<usize>,
}

/// Samples tried when looking for an action to add to a node.
const EXPANSION_DRAWS: usize = 8;

struct Node {
    action: Action,
    stats: ChildStats,
    children: Vec<usize>,
}

/// Open-loop UCT with iterative widening. Nodes are the planner's own
/// decision points; opponents move according to the opponent model in
/// between, so a stored action can be illegal on a later visit and is then
/// skipped for that iteration.
#[derive(Clone, Debug)]
pub struct Mcts {
    cfg: MctsConfig,
    vf: ValueFunction,
    seed: u64,
}

impl Mcts {
    pub fn new(cfg: MctsConfig, vf: ValueFunction, seed: u64) -> Self {
        Mcts { cfg, vf, seed }
    }

    /// Runs the search and returns the most visited root action.
    pub fn search(&self, state: &GameState, meter: &mut BudgetMeter, seed: u64, mut trace: Option<&mut MctsTrace>) -> Option<Action> {
        let mut rng = turn_rng(self.seed, seed);
        let view = observe(state, &mut rng);
        let cfg = &self.cfg;
        let eval = EvalConfig { opponent: cfg.opponent_model, discount: 1.0 };
        let mut rollout = Rollout::new(&view, &self.vf, eval);
        let mut nodes = vec![Node { action: Action::Pass, stats: ChildStats::default(), children: Vec::new() }];
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut path = Vec::with_capacity(cfg.max_depth + 1);
        let mut scratch: Vec<ChildStats> = Vec::new();
        let mut legal: Vec<usize> = Vec::new();

        while !meter.is_exhausted() {
            rollout.reset(&view);
            path.clear();
            path.push(0);
            let mut node = 0;
            let mut in_tree = true;
            while in_tree && path.len() <= cfg.max_depth && rollout.advance(meter, &mut rng) {
                let cap = cfg.widening_cap(nodes[node].stats.visits + 1);
                if nodes[node].children.len() < cap {
                    // a few draws for an action not yet in the tree, else fall through to selection
                    let fresh = (0..EXPANSION_DRAWS)
                        .map(|_| rollout.state().sample_action_with(&mut rng))
                        .find(|a| nodes[node].children.iter().all(|&c| nodes[c].action != *a));
                    if let Some(a) = fresh {
                        if rollout.step(Some(&a), meter, &mut rng).is_none() {
                            break;
                        }
                        let id = nodes.len();
                        nodes.push(Node { action: a, stats: ChildStats::default(), children: Vec::new() });
                        nodes[node].children.push(id);
                        path.push(id);
                        break;
                    }
                }
                legal.clear();
                legal.extend(nodes[node].children.iter().copied().filter(|&c| rollout.state().is_legal(&nodes[c].action)));
                scratch.clear();
                scratch.extend(legal.iter().map(|&c| nodes[c].stats));
                let chosen = match ucb_select(&scratch, nodes[node].stats.visits, cfg.exploration_constant, lo, hi) {
                    Some(i) => legal[i],
                    None => {
                        in_tree = false;
                        continue;
                    }
                };
                let action = nodes[chosen].action;
                if rollout.step(Some(&action), meter, &mut rng).is_none() {
                    break;
                }
                path.push(chosen);
                node = chosen;
            }
            for _ in 0..cfg.rollout_length {
                if rollout.step(None, meter, &mut rng).is_none() {
                    break;
                }
            }
            if rollout.steps() == 0 {
                break;
            }
            let v = rollout.value();
            lo = lo.min(v);
            hi = hi.max(v);
            for &n in &path {
                nodes[n].stats.visits += 1;
                nodes[n].stats.total += v;
            }
            if let Some(t) = trace.as_deref_mut() {
                t.root_visits.push(nodes[0].stats.visits);
                t.root_children.push(nodes[0].children.len());
            }
        }
        nodes[0]
            .children
            .iter()
            .copied()
            .fold(None::<usize>, |best, c| match best {
                None => Some(c),
                Some(b) => {
                    let (sb, sc) = (nodes[b].stats, nodes[c].stats);
                    let better = sc.visits > sb.visits
                        || (sc.visits == sb.visits && sc.total / f64::from(sc.visits.max(1)) > sb.total / f64::from(sb.visits.max(1)));
                    Some(if better { c } else { b })
                }
            })
            .map(|c| nodes[c].action)
    }
}

impl Agent for Mcts {
    fn act(&mut self, state: &GameState, meter: &mut BudgetMeter, seed: u64) -> Action {
        if forced_pass(state) {
            return Action::Pass;
        }
        let found = self.search(state, meter, seed, None);
        let mut rng = turn_rng(self.seed ^ 0x5eed, seed);
        match found {
            Some(a) => ensure_legal(state, a, &mut rng),
            None => state.sample_action_with(&mut rng),
        }
    }
}
