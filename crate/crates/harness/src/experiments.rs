use std::collections::BTreeMap;
use std::path::Path;

use r2_core::agents::{AgentKind, AgentSpec, BmrhConfig};
use r2_core::engine::GameParams;
use r2_core::events::TypeMapping;
use r2_core::ntbea::{combine_spaces, ntbea_optimize, Evaluation, NtbeaConfig, SearchSpace};
use r2_core::seeds;
use r2_core::valuefn::{required_weights, EventValueFunction, Mixer, ValueFunction, WeightVector};
use rayon::prelude::*;

use crate::game::{run_game, MatchResult};
use crate::spec::WeightTemplate;
use crate::stats::{median, Tally, WinRateTable};
use crate::HarnessError;

// Seed-path tags keep the experiment kinds' games apart.
const PLAY: u64 = 1;
const VALIDATE: u64 = 2;
const ROUND_ROBIN: u64 = 3;
const MULTI: u64 = 4;
const TUNE_GAME: u64 = 5;
const TUNE_VALIDATE: u64 = 6;
const TUNE_SEARCH: u64 = 7;

/// Settings shared by every game of an experiment.
#[derive(Clone, Debug)]
pub struct Table<'a> {
    pub params: &'a GameParams,
    pub budget: u64,
    pub base: Option<&'a Path>,
}

/// A game to play: seating, seed and batch label.
struct Fixture {
    seats: Vec<AgentSpec>,
    seed: u64,
    group: String,
}

/// Plays the fixtures on the current rayon pool, keeping their order.
fn play_all(fixtures: Vec<Fixture>, table: &Table<'_>) -> Result<Vec<MatchResult>, HarnessError> {
    fixtures
        .into_par_iter()
        .enumerate()
        .map(|(i, f)| {
            let mut r = run_game(&f.seats, table.params, f.seed, table.budget, table.base)?;
            r.game = i;
            r.group = f.group;
            Ok(r)
        })
        .collect()
}

/// Plays `agents` in fixed seats `games` times.
pub fn play(agents: &[AgentSpec], games: usize, table: &Table<'_>, seed: u64) -> Result<Vec<MatchResult>, HarnessError> {
    let fixtures = (0..games)
        .map(|g| Fixture { seats: agents.to_vec(), seed: seeds::derive(seed, &[PLAY, g as u64]), group: String::new() })
        .collect();
    play_all(fixtures, table)
}

/// Seating for game `g` of a rotation: the candidate moves one seat per
/// game, and each full rotation shares a setup seed.
fn rotation(candidate: &AgentSpec, opponent: &AgentSpec, players: usize, g: usize) -> (Vec<AgentSpec>, usize, u64) {
    let seat = g % players;
    let seats = (0..players).map(|i| if i == seat { candidate.clone() } else { opponent.clone() }).collect();
    (seats, seat, (g / players) as u64)
}

/// Head-to-head record of a candidate.
#[derive(Clone, Debug)]
pub struct Record {
    pub tally: Tally,
    pub results: Vec<MatchResult>,
}

fn record(candidate: &AgentSpec, opponent: &AgentSpec, n: usize, table: &Table<'_>, seed: u64, tag: &[u64], group: &str) -> Result<Record, HarnessError> {
    let players = table.params.num_players();
    let mut seats_of = Vec::with_capacity(n);
    let fixtures = (0..n)
        .map(|g| {
            let (seats, seat, round) = rotation(candidate, opponent, players, g);
            seats_of.push(seat);
            let mut path = tag.to_vec();
            path.push(round);
            Fixture { seats, seed: seeds::derive(seed, &path), group: group.to_string() }
        })
        .collect();
    let results = play_all(fixtures, table)?;
    let mut tally = Tally::default();
    for (r, &seat) in results.iter().zip(&seats_of) {
        tally.add(r.score(seat));
    }
    Ok(Record { tally, results })
}

/// `n` two-player games against `opponent`, alternating seats. Games `2k`
/// and `2k + 1` share a setup with the seats swapped.
pub fn validate(candidate: &AgentSpec, opponent: &AgentSpec, n: usize, table: &Table<'_>, seed: u64) -> Result<Record, HarnessError> {
    record(candidate, opponent, n, table, seed, &[VALIDATE], "validate")
}

#[derive(Clone, Debug)]
pub struct MultiReport {
    pub record: Record,
    /// Uniform-random win percentage for this player count.
    pub target_pct: f64,
    pub win_pct: f64,
    /// Observed minus baseline, in percentage points.
    pub delta: Option<f64>,
}

/// Percentage-point change from a two-player baseline.
pub fn delta(baseline_pct: f64, observed_pct: f64) -> f64 {
    observed_pct - baseline_pct
}

/// The candidate against `table.params.num_players() - 1` copies of `opponent`,
/// rotating through the seats.
pub fn multi_opponent(
    candidate: &AgentSpec,
    opponent: &AgentSpec,
    n: usize,
    baseline_pct: Option<f64>,
    table: &Table<'_>,
    seed: u64,
) -> Result<MultiReport, HarnessError> {
    let record = record(candidate, opponent, n, table, seed, &[MULTI], "multi")?;
    let win_pct = 100.0 * record.tally.win_rate();
    Ok(MultiReport {
        target_pct: 100.0 / table.params.num_players() as f64,
        win_pct,
        delta: baseline_pct.map(|b| delta(b, win_pct)),
        record,
    })
}

/// Labels made unique by suffixing repeats with their position.
pub fn unique_labels(agents: &[AgentSpec]) -> Vec<String> {
    let labels: Vec<String> = agents.iter().map(AgentSpec::label).collect();
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| if labels.iter().filter(|m| *m == l).count() > 1 { format!("{l}#{i}") } else { l.clone() })
        .collect()
}

/// Every unordered pair plays `games` two-player games with alternating seats.
pub fn round_robin(agents: &[AgentSpec], games: usize, table: &Table<'_>, seed: u64) -> Result<(WinRateTable, Vec<MatchResult>), HarnessError> {
    let labels = unique_labels(agents);
    let named: Vec<AgentSpec> = agents.iter().zip(&labels).map(|(a, l)| AgentSpec { name: Some(l.clone()), ..a.clone() }).collect();
    let mut fixtures = Vec::new();
    let mut meta = Vec::new();
    let mut pair = 0u64;
    for i in 0..agents.len() {
        for j in i + 1..agents.len() {
            for g in 0..games {
                let (seats, seat, round) = rotation(&named[i], &named[j], 2, g);
                meta.push((i, j, seat));
                fixtures.push(Fixture {
                    seats,
                    seed: seeds::derive(seed, &[ROUND_ROBIN, pair, round]),
                    group: format!("{} v {}", labels[i], labels[j]),
                });
            }
            pair += 1;
        }
    }
    let results = play_all(fixtures, table)?;
    let mut wr = WinRateTable::new(labels);
    for (r, &(i, j, seat)) in results.iter().zip(&meta) {
        wr.record(i, j, r.score(seat));
    }
    Ok((wr, results))
}

/// What a tuning campaign searches over.
#[derive(Clone, Debug)]
pub struct TuneTarget {
    pub agent: AgentSpec,
    /// Hyperparameter dimensions, named after the agent's config keys.
    pub agent_space: SearchSpace,
    pub weights: Option<WeightTemplate>,
}

impl TuneTarget {
    fn template(&self) -> Result<Option<(TypeMapping, Mixer)>, HarnessError> {
        let Some(w) = &self.weights else { return Ok(None) };
        let mapping = match &w.mapping {
            serde_json::Value::String(name) => TypeMapping::named(name)?,
            serde_json::Value::Array(_) => {
                let table: Vec<i64> = serde_json::from_value(w.mapping.clone())?;
                TypeMapping::from_table(&table)?
            }
            _ => return Err(HarnessError::Spec("mapping must be a name or a table".into())),
        };
        let mixer = Mixer { kind: w.mixer, features: mapping.group_count() };
        mixer.validate()?;
        Ok(Some((mapping, mixer)))
    }

    /// Agent dimensions followed by one weight-grid dimension per weight.
    pub fn space(&self) -> Result<SearchSpace, HarnessError> {
        match self.template()? {
            None => Ok(self.agent_space.clone()),
            Some((_, mixer)) => Ok(combine_spaces(&self.agent_space, &SearchSpace::weight_grid(required_weights(&mixer)))?),
        }
    }

    /// The agent a candidate stands for.
    pub fn decode(&self, space: &SearchSpace, candidate: &[usize]) -> Result<AgentSpec, HarnessError> {
        let map = space.to_map(candidate);
        let mut spec = self.agent.clone();
        let mut hp = serde_json::Map::new();
        for d in self.agent_space.dims() {
            hp.insert(d.name.clone(), map[&d.name].clone());
        }
        if spec.kind == AgentKind::Bmrh {
            let cfg = BmrhConfig::from_map(&hp).map_err(HarnessError::Spec)?;
            hp = match serde_json::to_value(cfg)? {
                serde_json::Value::Object(m) => m,
                _ => unreachable!("config serialises to an object"),
            };
        }
        spec.hyperparameters = hp;
        if let Some((mapping, mixer)) = self.template()? {
            let offset = self.agent_space.len();
            let weights = (0..required_weights(&mixer))
                .map(|i| space.value(candidate, offset + i).as_f64().ok_or_else(|| HarnessError::Spec("weight values must be numbers".into())))
                .collect::<Result<Vec<f64>, _>>()?;
            let ef = EventValueFunction::new(mapping, mixer.kind, WeightVector(weights))?;
            spec.value_function = ValueFunction::Event(ef).to_json_value();
        }
        Ok(spec)
    }
}

/// How a campaign is run.
#[derive(Clone, Debug)]
pub struct TunePlan {
    pub budgets: Vec<usize>,
    pub repetitions: usize,
    pub validation_games: usize,
    pub ntbea: NtbeaConfig,
}

/// One NTBEA run and its validation.
#[derive(Clone, Debug)]
pub struct TuneRun {
    pub budget: usize,
    pub repetition: usize,
    pub log: Vec<Evaluation>,
    pub best: Vec<usize>,
    pub best_estimate: f64,
    pub spec: AgentSpec,
    pub validation: Record,
}

#[derive(Clone, Debug)]
pub struct TuneReport {
    pub space: SearchSpace,
    pub runs: Vec<TuneRun>,
}

impl TuneReport {
    /// Median validation win percentage per budget, in budget order.
    pub fn medians(&self) -> BTreeMap<usize, f64> {
        let mut by: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for r in &self.runs {
            by.entry(r.budget).or_default().push(100.0 * r.validation.tally.win_rate());
        }
        by.into_iter().map(|(b, xs)| (b, median(&xs))).collect()
    }

    /// Best-validated run at the largest budget; earlier repetitions win ties.
    pub fn chosen(&self) -> Option<&TuneRun> {
        let top = self.runs.iter().map(|r| r.budget).max()?;
        self.runs.iter().filter(|r| r.budget == top).fold(None, |best: Option<&TuneRun>, r| match best {
            Some(b) if b.validation.tally.win_rate() >= r.validation.tally.win_rate() => Some(b),
            _ => Some(r),
        })
    }
}

/// NTBEA over the target's space, one game against `opponent` per
/// evaluation, then validation of each run's recommendation against
/// `validator`. Validation games use the same seeds for every run.
pub fn tune(target: &TuneTarget, opponent: &AgentSpec, validator: &AgentSpec, plan: &TunePlan, table: &Table<'_>, seed: u64) -> Result<TuneReport, HarnessError> {
    if table.params.num_players() != 2 {
        return Err(HarnessError::Spec("tuning plays two-player games".into()));
    }
    let space = target.space()?;
    let jobs: Vec<(usize, usize)> = plan.budgets.iter().flat_map(|&b| (0..plan.repetitions).map(move |r| (b, r))).collect();
    let runs = jobs
        .into_par_iter()
        .map(|(budget, repetition)| {
            let cfg = NtbeaConfig { budget, ..plan.ntbea.clone() };
            let run_seed = seeds::derive(seed, &[TUNE_SEARCH, budget as u64, repetition as u64]);
            let mut failure = None;
            let result = ntbea_optimize(&space, &cfg, run_seed, |c, i| {
                let game = || -> Result<f64, HarnessError> {
                    let cand = target.decode(&space, c)?;
                    let (seats, seat, _) = rotation(&cand, opponent, 2, i);
                    let s = seeds::derive(seed, &[TUNE_GAME, budget as u64, repetition as u64, i as u64]);
                    Ok(run_game(&seats, table.params, s, table.budget, table.base)?.score(seat))
                };
                game().unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    0.0
                })
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
            let mut spec = target.decode(&space, &result.best)?;
            spec.name = Some(format!("{}-b{budget}-r{repetition}", target.agent.label()));
            let validation = record(&spec, validator, plan.validation_games, table, seed, &[TUNE_VALIDATE], &format!("b{budget}-r{repetition}"))?;
            Ok(TuneRun { budget, repetition, log: result.log, best: result.best, best_estimate: result.best_estimate, spec, validation })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(TuneReport { space, runs })
}
