use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use r2_core::agents::{AgentKind, BmrhConfig};
use r2_core::ntbea::SearchSpace;

use crate::experiments::{self, Record, Table, TunePlan, TuneReport, TuneTarget};
use crate::game::write_results;
use crate::spec::{ExperimentKind, ExperimentSpec, Resolver};
use crate::stats::{fmt4, WinRateTable};
use crate::HarnessError;

fn create(out: &Path, name: &str) -> Result<BufWriter<File>, HarnessError> {
    let path = out.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| HarnessError::File(path, e))
}

fn write_record_summary(out: &Path, rec: &Record, extra: &[(&str, String)]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(create(out, "summary.csv")?);
    let (p, hw) = rec.tally.ci();
    let mut header = vec!["games", "wins", "ties", "losses", "win_pct", "ci95_pct"];
    let mut row = vec![
        rec.tally.games().to_string(),
        rec.tally.wins.to_string(),
        rec.tally.ties.to_string(),
        rec.tally.losses.to_string(),
        fmt4(100.0 * p),
        fmt4(100.0 * hw),
    ];
    for (k, v) in extra {
        header.push(k);
        row.push(v.clone());
    }
    w.write_record(&header)?;
    w.write_record(&row)?;
    w.flush()?;
    Ok(())
}

fn describe(rec: &Record) -> String {
    let (p, hw) = rec.tally.ci();
    format!(
        "{} games: {} wins, {} ties, {} losses; win rate {:.2}% +/- {:.2}",
        rec.tally.games(),
        rec.tally.wins,
        rec.tally.ties,
        rec.tally.losses,
        100.0 * p,
        100.0 * hw
    )
}

fn write_table(out: &Path, table: &WinRateTable) -> Result<(), HarnessError> {
    table.write_matrix(create(out, "matrix.csv")?)?;
    table.write_pairs(create(out, "pairs.csv")?)?;
    Ok(())
}

/// Writes `tuning.csv`, `validation.csv`, `summary.csv`, per-run agent
/// files and the chosen `agent.json`.
pub fn write_tuning(out: &Path, report: &TuneReport) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(create(out, "tuning.csv")?);
    let mut header = vec!["budget".to_string(), "repetition".into(), "iteration".into()];
    header.extend(report.space.dims().iter().map(|d| d.name.clone()));
    header.push("fitness".into());
    w.write_record(&header)?;
    for run in &report.runs {
        for e in &run.log {
            let mut row = vec![run.budget.to_string(), run.repetition.to_string(), e.iteration.to_string()];
            row.extend((0..report.space.len()).map(|d| plain(report.space.value(&e.candidate, d))));
            row.push(fmt4(e.fitness));
            w.write_record(&row)?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(create(out, "validation.csv")?);
    w.write_record(["budget", "repetition", "games", "wins", "ties", "losses", "win_pct", "ci95_pct", "model_estimate"])?;
    for run in &report.runs {
        let t = run.validation.tally;
        let (p, hw) = t.ci();
        w.write_record([
            run.budget.to_string(),
            run.repetition.to_string(),
            t.games().to_string(),
            t.wins.to_string(),
            t.ties.to_string(),
            t.losses.to_string(),
            fmt4(100.0 * p),
            fmt4(100.0 * hw),
            fmt4(run.best_estimate),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(create(out, "summary.csv")?);
    w.write_record(["budget", "runs", "median_win_pct", "min_win_pct", "max_win_pct"])?;
    for (budget, med) in report.medians() {
        let rates: Vec<f64> = report.runs.iter().filter(|r| r.budget == budget).map(|r| 100.0 * r.validation.tally.win_rate()).collect();
        let lo = rates.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        w.write_record([budget.to_string(), rates.len().to_string(), fmt4(med), fmt4(lo), fmt4(hi)])?;
    }
    w.flush()?;

    let agents = out.join("agents");
    fs::create_dir_all(&agents).map_err(|e| HarnessError::File(agents.clone(), e))?;
    for run in &report.runs {
        let mut f = create(&agents, &format!("b{}_r{}.json", run.budget, run.repetition))?;
        writeln!(f, "{}", serde_json::to_string_pretty(&run.spec)?)?;
    }
    if let Some(best) = report.chosen() {
        let mut f = create(out, "agent.json")?;
        writeln!(f, "{}", serde_json::to_string_pretty(&best.spec)?)?;
    }
    let all: Vec<_> = report.runs.iter().flat_map(|r| r.validation.results.iter().cloned()).collect();
    write_results(&all, create(out, "results.csv")?)?;
    Ok(())
}

fn plain(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Runs one experiment and writes its CSV files into `out`. Returns a short
/// human-readable summary.
pub fn run_experiment(kind: ExperimentKind, spec: &ExperimentSpec, resolver: &Resolver, out: &Path, seed: u64) -> Result<String, HarnessError> {
    spec.validate(kind)?;
    fs::create_dir_all(out).map_err(|e| HarnessError::File(out.to_path_buf(), e))?;
    let agents = spec.agents.iter().map(|a| resolver.agent(a)).collect::<Result<Vec<_>, _>>()?;
    let opponent = match &spec.opponent {
        Some(o) => Some(resolver.agent(o)?),
        None => agents.get(1).cloned(),
    };
    let base = resolver.base.as_deref();
    match kind {
        ExperimentKind::Play => {
            let params = resolver.params(spec.params.as_deref(), agents.len())?;
            let table = Table { params: &params, budget: spec.budget, base };
            let results = experiments::play(&agents, spec.games, &table, seed)?;
            write_results(&results, create(out, "results.csv")?)?;
            let capped = results.iter().filter(|r| r.capped).count();
            Ok(format!("{} games played, {capped} hit the turn cap", results.len()))
        }
        ExperimentKind::Validate => {
            let params = resolver.params(spec.params.as_deref(), 2)?;
            let table = Table { params: &params, budget: spec.budget, base };
            let opp = opponent.expect("validated");
            let rec = experiments::validate(&agents[0], &opp, spec.games, &table, seed)?;
            write_results(&rec.results, create(out, "results.csv")?)?;
            write_record_summary(out, &rec, &[])?;
            Ok(format!("{} vs {}: {}", agents[0].label(), opp.label(), describe(&rec)))
        }
        ExperimentKind::Roundrobin => {
            let params = resolver.params(spec.params.as_deref(), 2)?;
            let table = Table { params: &params, budget: spec.budget, base };
            let (wr, results) = experiments::round_robin(&agents, spec.games, &table, seed)?;
            write_results(&results, create(out, "results.csv")?)?;
            write_table(out, &wr)?;
            let avgs: Vec<String> = wr.labels.iter().enumerate().map(|(i, l)| format!("{l} {:.2}%", wr.average(i))).collect();
            Ok(format!("{} games; average win rate: {}", results.len(), avgs.join(", ")))
        }
        ExperimentKind::Multiopponent => {
            let params = resolver.params(spec.params.as_deref(), spec.num_opponents + 1)?;
            let table = Table { params: &params, budget: spec.budget, base };
            let opp = opponent.expect("validated");
            let rep = experiments::multi_opponent(&agents[0], &opp, spec.games, spec.baseline, &table, seed)?;
            write_results(&rep.record.results, create(out, "results.csv")?)?;
            let mut extra = vec![("target_pct", fmt4(rep.target_pct))];
            if let (Some(b), Some(d)) = (spec.baseline, rep.delta) {
                extra.push(("baseline_pct", fmt4(b)));
                extra.push(("delta", fmt4(d)));
            }
            write_record_summary(out, &rep.record, &extra)?;
            let delta = rep.delta.map(|d| format!(", delta {d:+.1}")).unwrap_or_default();
            Ok(format!("{} vs {}x {}: {} (target {:.2}%{delta})", agents[0].label(), spec.num_opponents, opp.label(), describe(&rep.record), rep.target_pct))
        }
        ExperimentKind::Tune => {
            let params = resolver.params(spec.params.as_deref(), 2)?;
            let table = Table { params: &params, budget: spec.budget, base };
            let opp = opponent.expect("validated");
            let validator = match &spec.validation_opponent {
                Some(v) => resolver.agent(v)?,
                None => opp.clone(),
            };
            let agent_space = match &spec.space {
                Some(p) => {
                    let path = resolver.path(p);
                    SearchSpace::from_json(&fs::read_to_string(&path).map_err(|e| HarnessError::File(path.clone(), e))?)?
                }
                None if agents[0].kind == AgentKind::Bmrh => BmrhConfig::search_space(),
                None => return Err(HarnessError::Spec("no shipped space for this agent kind; give `space`".into())),
            };
            let target = TuneTarget { agent: agents[0].clone(), agent_space, weights: spec.weights.clone() };
            let plan = TunePlan {
                budgets: spec.budgets.clone(),
                repetitions: spec.repetitions,
                validation_games: spec.validation_games,
                ntbea: spec.ntbea.clone(),
            };
            let report = experiments::tune(&target, &opp, &validator, &plan, &table, seed)?;
            write_tuning(out, &report)?;
            let medians: Vec<String> = report.medians().iter().map(|(b, m)| format!("{b}: {m:.2}%")).collect();
            Ok(format!("{}-dimensional space; median validation win rate by budget: {}", report.space.len(), medians.join(", ")))
        }
    }
}
