//! N-tuple bandit evolutionary algorithm for noisy discrete optimisation.
//!
//! A [`SearchSpace`] is an ordered list of named dimensions, each with a
//! finite list of JSON values; candidates are index vectors into it. The
//! [`NTupleModel`] keeps bandit statistics for value patterns over tuples of
//! dimensions and scores unseen candidates with a UCB estimate.

use std::collections::HashMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::valuefn::WEIGHT_GRID;

/// Added to pattern counts in the exploration term.
pub const COUNT_EPSILON: f64 = 1e-6;

/// Largest tuple table stored densely; bigger ones use a hash map.
const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Error)]
pub enum NtbeaError {
    #[error("dimension {0:?} needs at least two values")]
    TooFewValues(String),
    #[error("duplicate dimension name {0:?}")]
    DuplicateName(String),
    #[error("candidate does not fit the space")]
    BadCandidate,
    #[error("tuple scheme `all` is limited to {max} dimensions, got {got}")]
    TooManyTuples { max: usize, got: usize },
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dimension {
    pub name: String,
    pub values: Vec<serde_json::Value>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Dimension>", into = "Vec<Dimension>")]
pub struct SearchSpace {
    dims: Vec<Dimension>,
}

impl TryFrom<Vec<Dimension>> for SearchSpace {
    type Error = NtbeaError;

    fn try_from(dims: Vec<Dimension>) -> Result<Self, Self::Error> {
        SearchSpace::new(dims)
    }
}

impl From<SearchSpace> for Vec<Dimension> {
    fn from(s: SearchSpace) -> Self {
        s.dims
    }
}

impl SearchSpace {
    pub fn new(dims: Vec<Dimension>) -> Result<Self, NtbeaError> {
        let mut seen = std::collections::HashSet::new();
        for d in &dims {
            if d.values.len() < 2 {
                return Err(NtbeaError::TooFewValues(d.name.clone()));
            }
            if !seen.insert(d.name.as_str()) {
                return Err(NtbeaError::DuplicateName(d.name.clone()));
            }
        }
        Ok(SearchSpace { dims })
    }

    pub fn from_json(text: &str) -> Result<Self, NtbeaError> {
        SearchSpace::new(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable")
    }

    /// `n` weight dimensions `w0..` over the 11-value grid.
    pub fn weight_grid(n: usize) -> Self {
        let values: Vec<serde_json::Value> = WEIGHT_GRID.iter().map(|&w| serde_json::json!(w)).collect();
        let dims = (0..n).map(|i| Dimension { name: format!("w{i}"), values: values.clone() }).collect();
        SearchSpace { dims }
    }

    /// Integer-valued dimensions, handy for synthetic problems.
    pub fn integer(dims: usize, values: usize) -> Self {
        let vals: Vec<serde_json::Value> = (0..values).map(|v| serde_json::json!(v)).collect();
        SearchSpace::new((0..dims).map(|i| Dimension { name: format!("x{i}"), values: vals.clone() }).collect())
            .expect("at least two values per dimension")
    }

    /// Concatenation of `self` and `other`; names must not clash.
    pub fn combine(&self, other: &SearchSpace) -> Result<Self, NtbeaError> {
        SearchSpace::new(self.dims.iter().chain(&other.dims).cloned().collect())
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn radix(&self, dim: usize) -> usize {
        self.dims[dim].values.len()
    }

    /// Number of candidates, as a float since it overflows quickly.
    pub fn size(&self) -> f64 {
        self.dims.iter().map(|d| d.values.len() as f64).product()
    }

    pub fn contains(&self, candidate: &[usize]) -> bool {
        candidate.len() == self.len() && candidate.iter().zip(&self.dims).all(|(&i, d)| i < d.values.len())
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        self.dims.iter().map(|d| rng.gen_range(0..d.values.len())).collect()
    }

    pub fn value(&self, candidate: &[usize], dim: usize) -> &serde_json::Value {
        &self.dims[dim].values[candidate[dim]]
    }

    /// `{name: value}` for every dimension.
    pub fn to_map(&self, candidate: &[usize]) -> serde_json::Map<String, serde_json::Value> {
        self.dims.iter().zip(candidate).map(|(d, &i)| (d.name.clone(), d.values[i].clone())).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|d| d.name == name)
    }
}

pub fn combine_spaces(a: &SearchSpace, b: &SearchSpace) -> Result<SearchSpace, NtbeaError> {
    a.combine(b)
}

/// Which dimension subsets get a bandit table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TupleScheme {
    /// Every single dimension, every pair, and the full tuple.
    #[default]
    #[serde(rename = "1+2+N")]
    OneTwoN,
    #[serde(rename = "1+N")]
    OneN,
    /// Every non-empty subset; only for small spaces.
    #[serde(rename = "all")]
    All,
}

impl TupleScheme {
    const ALL_LIMIT: usize = 12;

    pub fn tuples(self, dims: usize) -> Result<Vec<Vec<usize>>, NtbeaError> {
        let mut out: Vec<Vec<usize>> = (0..dims).map(|i| vec![i]).collect();
        match self {
            TupleScheme::OneTwoN => {
                for i in 0..dims {
                    for j in i + 1..dims {
                        out.push(vec![i, j]);
                    }
                }
            }
            TupleScheme::OneN => {}
            TupleScheme::All => {
                if dims > Self::ALL_LIMIT {
                    return Err(NtbeaError::TooManyTuples { max: Self::ALL_LIMIT, got: dims });
                }
                out.clear();
                for mask in 1u32..(1 << dims) {
                    out.push((0..dims).filter(|&i| mask & (1 << i) != 0).collect());
                }
                return Ok(out);
            }
        }
        if dims > 2 || (dims == 2 && self == TupleScheme::OneN) {
            out.push((0..dims).collect());
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ArmStats {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl ArmStats {
    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }

    fn add(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }
}

#[derive(Clone, Debug)]
enum Table {
    Dense(Vec<ArmStats>),
    Sparse(HashMap<Vec<u16>, ArmStats>),
}

#[derive(Clone, Debug)]
struct TupleTable {
    dims: Vec<usize>,
    radices: Vec<usize>,
    table: Table,
}

impl TupleTable {
    fn new(dims: Vec<usize>, space: &SearchSpace) -> Self {
        let radices: Vec<usize> = dims.iter().map(|&d| space.radix(d)).collect();
        let size = radices.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r).filter(|&s| s <= DENSE_LIMIT));
        let table = match size {
            Some(n) => Table::Dense(vec![ArmStats::default(); n]),
            None => Table::Sparse(HashMap::new()),
        };
        TupleTable { dims, radices, table }
    }

    fn dense_index(&self, c: &[usize]) -> usize {
        self.dims.iter().zip(&self.radices).fold(0, |acc, (&d, &r)| acc * r + c[d])
    }

    fn key(&self, c: &[usize]) -> Vec<u16> {
        self.dims.iter().map(|&d| c[d] as u16).collect()
    }

    fn get(&self, c: &[usize]) -> ArmStats {
        match &self.table {
            Table::Dense(v) => v[self.dense_index(c)],
            Table::Sparse(m) => m.get(&self.key(c)).copied().unwrap_or_default(),
        }
    }

    fn add(&mut self, c: &[usize], x: f64) {
        if matches!(self.table, Table::Dense(_)) {
            let i = self.dense_index(c);
            if let Table::Dense(v) = &mut self.table {
                v[i].add(x);
            }
        } else {
            let key = self.key(c);
            if let Table::Sparse(m) = &mut self.table {
                m.entry(key).or_default().add(x);
            }
        }
    }
}

/// Bandit statistics over tuples of dimensions.
#[derive(Clone, Debug)]
pub struct NTupleModel {
    tables: Vec<TupleTable>,
    evaluations: u64,
}

impl NTupleModel {
    pub fn new(space: &SearchSpace, scheme: TupleScheme) -> Result<Self, NtbeaError> {
        let tables = scheme.tuples(space.len())?.into_iter().map(|t| TupleTable::new(t, space)).collect();
        Ok(NTupleModel { tables, evaluations: 0 })
    }

    /// A model with explicit tuples.
    pub fn with_tuples(space: &SearchSpace, tuples: Vec<Vec<usize>>) -> Self {
        NTupleModel { tables: tuples.into_iter().map(|t| TupleTable::new(t, space)).collect(), evaluations: 0 }
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn tuples(&self) -> impl Iterator<Item = &[usize]> {
        self.tables.iter().map(|t| t.dims.as_slice())
    }

    pub fn add(&mut self, candidate: &[usize], fitness: f64) {
        for t in &mut self.tables {
            t.add(candidate, fitness);
        }
        self.evaluations += 1;
    }

    /// Statistics of `candidate`'s pattern in tuple `t`.
    pub fn stats(&self, t: usize, candidate: &[usize]) -> ArmStats {
        self.tables[t].get(candidate)
    }

    /// Average over tuples of the pattern mean plus
    /// `k * sqrt(ln(N + 1) / (n + COUNT_EPSILON))`; unvisited patterns
    /// contribute a mean of zero and the exploration term with `n = 0`.
    pub fn ucb_estimate(&self, candidate: &[usize], k: f64) -> f64 {
        if self.tables.is_empty() {
            return 0.0;
        }
        let ln_n = ((self.evaluations + 1) as f64).ln();
        let total: f64 = self
            .tables
            .iter()
            .map(|t| {
                let s = t.get(candidate);
                s.mean().unwrap_or(0.0) + k * (ln_n / (s.count as f64 + COUNT_EPSILON)).sqrt()
            })
            .sum();
        total / self.tables.len() as f64
    }

    /// Average pattern mean over the tuples where the pattern was seen.
    pub fn mean_estimate(&self, candidate: &[usize]) -> Option<f64> {
        let means: Vec<f64> = self.tables.iter().filter_map(|t| t.get(candidate).mean()).collect();
        (!means.is_empty()).then(|| means.iter().sum::<f64>() / means.len() as f64)
    }
}

pub fn ucb_estimate(model: &NTupleModel, candidate: &[usize], k: f64) -> f64 {
    model.ucb_estimate(candidate, k)
}

/// Re-draws one uniformly chosen dimension to a different value, and each
/// other dimension independently with probability `1 - eps^(1/(D-1))`, so
/// that only the forced dimension changes with probability `eps`.
pub fn mutate_neighbor<R: Rng + ?Sized>(candidate: &[usize], space: &SearchSpace, eps: f64, rng: &mut R) -> Vec<usize> {
    let d = candidate.len();
    let mut out = candidate.to_vec();
    if d == 0 {
        return out;
    }
    let redraw = |i: usize, out: &mut Vec<usize>, rng: &mut R| {
        let r = space.radix(i);
        let v = rng.gen_range(0..r - 1);
        out[i] = if v >= candidate[i] { v + 1 } else { v };
    };
    let forced = rng.gen_range(0..d);
    redraw(forced, &mut out, rng);
    if d > 1 {
        let p_other = 1.0 - eps.clamp(0.0, 1.0).powf(1.0 / (d - 1) as f64);
        for i in (0..d).filter(|&i| i != forced) {
            if rng.gen::<f64>() < p_other {
                redraw(i, &mut out, rng);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct NtbeaConfig {
    pub k: f64,
    pub epsilon: f64,
    pub neighbourhood_size: usize,
    pub tuple_scheme: TupleScheme,
    pub budget: usize,
}

impl Default for NtbeaConfig {
    fn default() -> Self {
        NtbeaConfig { k: 1.0, epsilon: 0.7, neighbourhood_size: 50, tuple_scheme: TupleScheme::OneTwoN, budget: 500 }
    }
}

impl NtbeaConfig {
    pub fn validate(&self) -> Result<(), NtbeaError> {
        if !(self.k >= 0.0) {
            return Err(NtbeaError::Config("k must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(NtbeaError::Config("epsilon must lie in [0, 1]".into()));
        }
        if self.budget == 0 || self.neighbourhood_size == 0 {
            return Err(NtbeaError::Config("budget and neighbourhoodSize must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub iteration: usize,
    pub candidate: Vec<usize>,
    pub fitness: f64,
}

#[derive(Clone, Debug)]
pub struct NtbeaResult {
    /// Evaluated candidate with the best model mean.
    pub best: Vec<usize>,
    pub best_estimate: f64,
    pub log: Vec<Evaluation>,
    pub model: NTupleModel,
}

/// Runs NTBEA for `cfg.budget` fitness evaluations. `fitness` receives the
/// candidate and the evaluation index.
pub fn ntbea_optimize<F>(space: &SearchSpace, cfg: &NtbeaConfig, seed: u64, mut fitness: F) -> Result<NtbeaResult, NtbeaError>
where
    F: FnMut(&[usize], usize) -> f64,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = NTupleModel::new(space, cfg.tuple_scheme)?;
    let mut log = Vec::with_capacity(cfg.budget);
    let mut evaluated: Vec<Vec<usize>> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut current = space.random(&mut rng);
    for iteration in 0..cfg.budget {
        let f = fitness(&current, iteration);
        model.add(&current, f);
        if seen.insert(current.clone()) {
            evaluated.push(current.clone());
        }
        log.push(Evaluation { iteration, candidate: current.clone(), fitness: f });
        if iteration + 1 == cfg.budget || space.is_empty() {
            break;
        }
        let mut best: Option<(Vec<usize>, f64)> = None;
        for _ in 0..cfg.neighbourhood_size {
            let n = mutate_neighbor(&current, space, cfg.epsilon, &mut rng);
            let u = model.ucb_estimate(&n, cfg.k);
            if best.as_ref().is_none_or(|(_, b)| u > *b) {
                best = Some((n, u));
            }
        }
        current = best.expect("neighbourhood is not empty").0;
    }
    let (best, best_estimate) = evaluated
        .iter()
        .map(|c| (c, model.mean_estimate(c).unwrap_or(f64::NEG_INFINITY)))
        .fold(None::<(&Vec<usize>, f64)>, |acc, (c, m)| match acc {
            Some((_, b)) if b >= m => acc,
            _ => Some((c, m)),
        })
        .map(|(c, m)| (c.clone(), m))
        .expect("at least one evaluation");
    Ok(NtbeaResult { best, best_estimate, log, model })
}

/// Writes the per-evaluation log: iteration, one column per dimension, fitness.
pub fn write_log_csv<W: Write>(space: &SearchSpace, log: &[Evaluation], out: W) -> Result<(), NtbeaError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["iteration".to_string()];
    header.extend(space.dims().iter().map(|d| d.name.clone()));
    header.push("fitness".into());
    w.write_record(&header)?;
    for e in log {
        let mut row = vec![e.iteration.to_string()];
        row.extend((0..space.len()).map(|d| format_value(space.value(&e.candidate, d))));
        row.push(format!("{:.4}", e.fitness));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn format_value(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) if n.is_f64() => format!("{:.4}", n.as_f64().expect("f64")),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_sizes() {
        assert_eq!(TupleScheme::OneTwoN.tuples(10).unwrap().len(), 10 + 45 + 1);
        assert_eq!(TupleScheme::OneN.tuples(5).unwrap().len(), 6);
        assert_eq!(TupleScheme::All.tuples(4).unwrap().len(), 15);
        assert!(TupleScheme::All.tuples(20).is_err());
        // no duplicate full tuple when it coincides with a pair or single
        assert_eq!(TupleScheme::OneTwoN.tuples(2).unwrap().len(), 3);
        assert_eq!(TupleScheme::OneTwoN.tuples(1).unwrap().len(), 1);
    }

    #[test]
    fn sparse_tables_work() {
        let space = SearchSpace::integer(6, 11);
        let mut m = NTupleModel::new(&space, TupleScheme::OneTwoN).unwrap();
        m.add(&[1, 2, 3, 4, 5, 6], 1.0);
        m.add(&[1, 2, 3, 4, 5, 6], 0.0);
        let last = m.tables.len() - 1;
        assert!(matches!(m.tables[last].table, Table::Sparse(_)));
        assert_eq!(m.stats(last, &[1, 2, 3, 4, 5, 6]).count, 2);
        assert_eq!(m.stats(last, &[0, 2, 3, 4, 5, 6]).count, 0);
    }
}
