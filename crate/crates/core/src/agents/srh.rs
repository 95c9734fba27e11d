use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bmrh::TieBreak;
use super::evolve::{evolve, Built, Origin, Schedule};
use super::{ensure_legal, forced_pass, observe, turn_rng, Agent};
use crate::engine::{Action, GameState};
use crate::valuefn::{BudgetMeter, EvalConfig, OpponentModel, Rollout, SequenceValue, ValueFunction};

/// Seeded rolling horizon settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct SrhConfig {
    pub sequence_length: usize,
    pub population_size: usize,
    pub elite_count: usize,
    pub offspring_per_parent: usize,
    /// Per-gene reseeding probability; at least one gene always changes.
    pub gene_mutation_rate: f64,
    pub value_discount: f64,
    pub opponent_model: OpponentModel,
    pub tie_break: TieBreak,
}

impl Default for SrhConfig {
    fn default() -> Self {
        SrhConfig {
            sequence_length: 2,
            population_size: 10,
            elite_count: 2,
            offspring_per_parent: 2,
            gene_mutation_rate: 0.3,
            value_discount: 1.0,
            opponent_model: OpponentModel::Random,
            tie_break: TieBreak::First,
        }
    }
}

impl SrhConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.sequence_length == 0 {
            return Err("sequenceLength must be at least 1".into());
        }
        if self.elite_count == 0 || self.population_size < self.elite_count || self.offspring_per_parent == 0 {
            return Err("need 1 <= eliteCount <= populationSize and offspringPerParent >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.gene_mutation_rate) {
            return Err("geneMutationRate must lie in [0, 1]".into());
        }
        if !(self.value_discount > 0.0 && self.value_discount <= 1.0) {
            return Err("valueDiscount must lie in (0, 1]".into());
        }
        Ok(())
    }
}

fn decode_with<R: Rng + ?Sized>(
    rollout: &mut Rollout<'_>,
    root: &GameState,
    genome: &[u64],
    meter: &mut BudgetMeter,
    rng: &mut R,
) -> (Vec<Action>, SequenceValue) {
    rollout.reset(root);
    let mut actions = Vec::with_capacity(genome.len());
    let mut exhausted = false;
    for &gene in genome {
        if !rollout.advance(meter, rng) {
            exhausted = !rollout.is_over();
            break;
        }
        let a = rollout.state().sample_action(gene);
        match rollout.step(Some(&a), meter, rng) {
            Some(played) => actions.push(played),
            None => {
                exhausted = true;
                break;
            }
        }
    }
    let value = SequenceValue { value: rollout.value(), played: actions.len(), exhausted };
    (actions, value)
}

/// Plays gene `i` as `sample_action(gene_i)` at the i-th own turn of the
/// roll. Opponent moves draw on `rng`.
pub fn decode_genome<R: Rng + ?Sized>(
    s: &GameState,
    genome: &[u64],
    vf: &ValueFunction,
    cfg: EvalConfig,
    meter: &mut BudgetMeter,
    rng: &mut R,
) -> (Vec<Action>, SequenceValue) {
    let mut rollout = Rollout::new(s, vf, cfg);
    decode_with(&mut rollout, s, genome, meter, rng)
}

/// Seeded rolling horizon agent: genomes are sampler seeds, so decoded
/// sequences are legal by construction.
#[derive(Clone, Debug)]
pub struct Srh {
    cfg: SrhConfig,
    vf: ValueFunction,
    seed: u64,
}

impl Srh {
    pub fn new(cfg: SrhConfig, vf: ValueFunction, seed: u64) -> Self {
        Srh { cfg, vf, seed }
    }
}

impl Agent for Srh {
    fn act(&mut self, state: &GameState, meter: &mut BudgetMeter, seed: u64) -> Action {
        if forced_pass(state) {
            return Action::Pass;
        }
        let mut rng = turn_rng(self.seed, seed);
        let view = observe(state, &mut rng);
        let cfg = &self.cfg;
        let len = cfg.sequence_length;
        let eval = EvalConfig { opponent: cfg.opponent_model, discount: cfg.value_discount };
        let mut rollout = Rollout::new(&view, &self.vf, eval);
        let sched = Schedule {
            population: cfg.population_size,
            elites: cfg.elite_count,
            offspring: cfg.offspring_per_parent,
            tie_break: cfg.tie_break,
        };
        let best = evolve(sched, None::<&Vec<u64>>, &mut rng, |origin: Origin<'_, Vec<u64>>, rng| {
            let genome: Vec<u64> = match origin {
                Origin::Child(parent) => {
                    let mut g = parent.clone();
                    let mut changed = false;
                    for gene in g.iter_mut() {
                        if rng.gen::<f64>() < cfg.gene_mutation_rate {
                            *gene = rng.gen();
                            changed = true;
                        }
                    }
                    if !changed {
                        let i = rng.gen_range(0..len);
                        g[i] = rng.gen();
                    }
                    g
                }
                Origin::Fresh | Origin::Shifted(_) => (0..len).map(|_| rng.gen()).collect(),
            };
            let (_, v) = decode_with(&mut rollout, &view, &genome, meter, rng);
            Built { genome, fitness: v.value, complete: !v.exhausted }
        });
        let first = best.and_then(|g| g.first().copied()).map(|gene| view.sample_action(gene));
        match first {
            Some(a) => ensure_legal(state, a, &mut rng),
            None => state.sample_action_with(&mut rng),
        }
    }
}
