//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! (written straight to stdout so it shows without `--nocapture`) and then
//! asserts it.

use std::fs;
use std::io::Write;
use std::process::Command;

use r2_core::agents::{AgentKind, AgentSpec};
use r2_core::engine::*;
use r2_core::events::{synthesize, Event, TypeMapping};
use r2_core::ntbea::{ntbea_optimize, NtbeaConfig, SearchSpace};
use r2_core::valuefn::*;
use r2_harness::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, pass: bool, detail: &str) {
    let line = format!("criterion {n:>2}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    std::io::stdout().lock().write_all(line.as_bytes()).unwrap();
    assert!(pass, "criterion {n} failed: {detail}");
}

#[test]
fn c01_weight_counts() {
    let cases = [
        (Mixer::linear(5), 5),
        (Mixer::polynomial(5, 2), 15),
        (Mixer::polynomial(5, 3), 35),
        (Mixer::linear(18), 18),
        (Mixer::polynomial(18, 2), 171),
        (Mixer::polynomial(18, 3), 1140),
    ];
    let got: Vec<usize> = cases.iter().map(|(m, _)| required_weights(m)).collect();
    let want: Vec<usize> = cases.iter().map(|&(_, w)| w).collect();
    report(1, got == want, &format!("weight counts {got:?}"));
}

/// Sum over every non-decreasing index tuple, enumerated in lexicographic order.
fn oracle(theta: &[f64], w: &[f64], d: usize) -> f64 {
    let n = theta.len();
    let mut total = 0.0;
    let mut k = 0;
    for flat in 0..n.pow(d as u32) {
        let idx: Vec<usize> = (0..d).rev().map(|p| flat / n.pow(p as u32) % n).collect();
        if idx.windows(2).any(|p| p[0] > p[1]) {
            continue;
        }
        total += w[k] * idx.iter().map(|&i| theta[i]).product::<f64>();
        k += 1;
    }
    assert_eq!(k, w.len());
    total
}

#[test]
fn c02_polynomial_mixer() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // worked case: w1*t0^2 + w2*t0*t1 + w3*t1^2
    let (t, w) = ([1.5, -2.0], [0.2, -0.4, 0.8]);
    let worked = eval_mixer(&Mixer::polynomial(2, 2), &w, &t).unwrap();
    let mut ok = (worked - (w[0] * t[0] * t[0] + w[1] * t[0] * t[1] + w[2] * t[1] * t[1])).abs() < 1e-12;
    let mut worst: f64 = 0.0;
    for n in 1..=5 {
        for d in 1..=3 {
            let m = Mixer::polynomial(n, d as u32);
            for _ in 0..100 {
                let theta: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..6u8))).collect();
                let w: Vec<f64> = (0..required_weights(&m)).map(|_| WEIGHT_GRID[rng.gen_range(0..11)]).collect();
                let got = eval_mixer(&m, &w, &theta).unwrap();
                let want = oracle(&theta, &w, d);
                let rel = (got - want).abs() / want.abs().max(1e-12);
                if (got - want).abs() > 1e-12 {
                    worst = worst.max(rel);
                }
            }
        }
    }
    ok &= worst <= 1e-9;
    report(2, ok, &format!("worked expansion ok, worst relative error {worst:e} over 1500 inputs"));
}

fn sorted_ids(events: &[Event]) -> Vec<usize> {
    let mut v: Vec<usize> = events.iter().map(|e| e.kind.id()).collect();
    v.sort_unstable();
    v
}

fn set_card(s: &mut GameState, c: Card) {
    let old = s.face_up[0][0].replace(c).unwrap();
    s.decks[0].push(old);
}

fn give(s: &mut GameState, p: usize, t: [u8; 5]) {
    let v = TokenVector::new(t);
    s.table_tokens = s.table_tokens.checked_sub(&v).unwrap();
    s.players[p].tokens = s.players[p].tokens.checked_add(&v).unwrap();
}

fn bundle(t: [u8; 5], jokers: u8) -> TokenBundle {
    TokenBundle { tokens: TokenVector::new(t), jokers }
}

fn card(points: u8, cost: [u8; 5]) -> Card {
    Card { id: 1000, tier: 0, points, bonus: 1, cost: TokenVector::new(cost) }
}

struct Golden {
    name: &'static str,
    events: Vec<Event>,
    want: Vec<usize>,
    hc: Option<Vec<f64>>,
}

fn goldens() -> Vec<Golden> {
    let mut out = Vec::new();
    let mut push = |name, events: Vec<Event>, mut want: Vec<usize>, hc: Option<Vec<f64>>| {
        want.sort_unstable();
        out.push(Golden { name, events, want, hc });
    };

    let mut s = GameState::standard(2, 0);
    let e = s.apply_action(Action::TakeDifferent { suits: TokenVector::new([1, 1, 1, 0, 0]), returns: TokenBundle::EMPTY }).unwrap();
    push("take different", e, vec![2, 8, 2, 8, 2, 8], Some(vec![3.0, 0.0, 0.0, 0.0, 0.0]));

    let mut s = GameState::standard(2, 0);
    let e = s.apply_action(Action::TakeSame { suit: 3, returns: TokenBundle::EMPTY }).unwrap();
    push("take same", e, vec![2, 8], Some(vec![1.0, 0.0, 0.0, 0.0, 0.0]));

    let mut s = GameState::standard(2, 0);
    give(&mut s, 0, [0, 0, 2, 3, 3]);
    let e = s.apply_action(Action::TakeDifferent { suits: TokenVector::new([1, 1, 1, 0, 0]), returns: bundle([0, 0, 0, 0, 1], 0) }).unwrap();
    push("take with return", e, vec![2, 8, 2, 8, 2, 8, 9, 1], None);

    let mut s = GameState::standard(2, 0);
    set_card(&mut s, card(1, [3, 0, 0, 0, 0]));
    give(&mut s, 0, [3, 0, 0, 0, 0]);
    let e = s.apply_action(Action::BuyFaceUp { deck: 0, slot: 0, payment: bundle([3, 0, 0, 0, 0], 0) }).unwrap();
    push("buy face-up", e, vec![9, 1, 15, 16, 5, 6], Some(vec![0.0, 0.0, 0.0, 0.0, 1.0]));

    let mut s = GameState::standard(2, 0);
    set_card(&mut s, card(0, [2, 1, 0, 0, 0]));
    give(&mut s, 0, [2, 0, 0, 0, 0]);
    s.players[0].jokers = 1;
    s.table_jokers -= 1;
    let e = s.apply_action(Action::BuyFaceUp { deck: 0, slot: 0, payment: bundle([2, 0, 0, 0, 0], 1) }).unwrap();
    push("buy with joker, no points", e, vec![9, 1, 11, 3, 15, 5, 6], Some(vec![0.0; 5]));

    let mut s = GameState::standard(2, 0);
    set_card(&mut s, card(2, [0, 0, 1, 0, 0]));
    s.apply_action(Action::ReserveFaceUp { deck: 0, slot: 0, returns: TokenBundle::EMPTY }).unwrap();
    s.apply_action(Action::Pass).ok();
    if s.current_player != 0 {
        s.skip_turn().unwrap();
    }
    give(&mut s, 0, [0, 0, 1, 0, 0]);
    let e = s.apply_action(Action::BuyReserved { hidden: false, index: 0, payment: bundle([0, 0, 1, 0, 0], 0) }).unwrap();
    push("buy reserved", e, vec![9, 1, 15, 16], Some(vec![0.0, 0.0, 0.0, 0.0, 1.0]));

    let mut s = GameState::standard(2, 0);
    let e = s.apply_action(Action::ReserveFaceUp { deck: 1, slot: 2, returns: TokenBundle::EMPTY }).unwrap();
    push("reserve face-up with joker", e, vec![13, 5, 6, 10, 4], Some(vec![1.0, 0.0, 1.0, 0.0, 0.0]));

    let mut s = GameState::standard(2, 0);
    s.players[1].jokers = s.table_jokers;
    s.table_jokers = 0;
    let e = s.apply_action(Action::ReserveFaceUp { deck: 0, slot: 1, returns: TokenBundle::EMPTY }).unwrap();
    push("reserve face-up, no joker left", e, vec![13, 5, 6], Some(vec![0.0, 0.0, 1.0, 0.0, 0.0]));

    let mut s = GameState::standard(2, 0);
    let e = s.apply_action(Action::ReserveDeckTop { deck: 2, returns: TokenBundle::EMPTY }).unwrap();
    push("reserve deck top", e, vec![12, 10, 4], Some(vec![1.0, 1.0, 0.0, 0.0, 0.0]));

    let mut s = GameState::standard(2, 0);
    s.nobles[0] = Noble { points: 3, requirement: TokenVector::new([0, 1, 0, 0, 0]) };
    set_card(&mut s, card(0, [1, 0, 0, 0, 0]));
    give(&mut s, 0, [1, 0, 0, 0, 0]);
    let e = s.apply_action(Action::BuyFaceUp { deck: 0, slot: 0, payment: bundle([1, 0, 0, 0, 0], 0) }).unwrap();
    push("buy triggering a noble", e, vec![9, 1, 15, 5, 6, 0, 14, 17], Some(vec![0.0, 0.0, 0.0, 1.0, 1.0]));
    out
}

#[test]
fn c03_event_goldens() {
    let hc = TypeMapping::hand_crafted();
    let mut failures = Vec::new();
    let all = goldens();
    for g in &all {
        if sorted_ids(&g.events) != g.want {
            failures.push(format!("{}: ids {:?}", g.name, g.events.iter().map(|e| e.kind.id()).collect::<Vec<_>>()));
        }
        if let Some(want) = &g.hc {
            let got = synthesize(&g.events, 0, &hc);
            if &got != want {
                failures.push(format!("{}: hc {got:?}", g.name));
            }
        }
    }
    report(3, failures.is_empty(), &format!("{} traces; {}", all.len(), if failures.is_empty() { "all exact".into() } else { failures.join("; ") }));
}

#[test]
fn c04_conservation() {
    let start = std::time::Instant::now();
    let mut broken = None;
    let mut capped = 0;
    let mut finished = 0;
    for g in 0..1000u64 {
        let mut s = GameState::standard(2, g);
        let cards = s.card_ids();
        let mut rng = ChaCha8Rng::seed_from_u64(g ^ 0x5a5a);
        while !s.is_terminal() {
            let a = s.sample_action_with(&mut rng);
            s.apply_action(a).unwrap();
            if let Err(e) = s.check_invariants() {
                broken.get_or_insert(format!("game {g}: {e}"));
            }
            if s.card_ids() != cards {
                broken.get_or_insert(format!("game {g}: card set changed"));
            }
        }
        finished += 1;
        capped += usize::from(s.winner().unwrap() == Outcome::Capped);
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = broken.is_none() && finished == 1000 && secs < 120.0;
    report(4, ok, &format!("{finished}/1000 terminated ({capped} at the turn cap) in {secs:.1}s; {}", broken.unwrap_or_else(|| "no violations".into())));
}

#[test]
fn c05_ntbea_recovery() {
    let start = std::time::Instant::now();
    let cfg = NtbeaConfig::default();
    let space = SearchSpace::integer(5, 11);
    let max_hits = (0..100)
        .filter(|&s| ntbea_optimize(&space, &cfg, s, |c, _| c.iter().filter(|&&v| v == 10).count() as f64).unwrap().best == vec![10; 5])
        .count();
    let bits = SearchSpace::integer(10, 2);
    let one_hits = (0..100)
        .filter(|&s| {
            let mut noise = ChaCha8Rng::seed_from_u64(s + 1000);
            let r = ntbea_optimize(&bits, &cfg, s, |c, _| c.iter().map(|&b| if noise.gen::<f64>() < 0.2 { 1 - b } else { b }).sum::<usize>() as f64);
            r.unwrap().best == vec![1; 10]
        })
        .count();
    let secs = start.elapsed().as_secs_f64();
    report(5, max_hits >= 95 && one_hits >= 70 && secs < 300.0, &format!("max-value {max_hits}/100, noisy OneMax {one_hits}/100 in {secs:.1}s"));
}

#[test]
fn c06_tuning_trend() {
    let start = std::time::Instant::now();
    let params = GameParams::standard(2);
    let table = Table { params: &params, budget: DEFAULT_BUDGET, base: None };
    let target = TuneTarget {
        agent: AgentSpec { name: Some("tuned".into()), ..AgentSpec::new(AgentKind::Bmrh) },
        agent_space: r2_core::agents::BmrhConfig::search_space(),
        weights: None,
    };
    let frozen = AgentSpec { name: Some("default".into()), ..AgentSpec::new(AgentKind::Bmrh) };
    let plan = TunePlan { budgets: vec![50, 200, 1000], repetitions: 10, validation_games: 100, ntbea: NtbeaConfig::default() };
    let report_ = tune(&target, &frozen, &frozen, &plan, &table, 11).unwrap();
    let medians: Vec<f64> = report_.medians().values().copied().collect();
    let secs = start.elapsed().as_secs_f64();
    let ok = medians.windows(2).all(|w| w[0] <= w[1]) && secs < 7200.0;
    report(6, ok, &format!("median validation win % at budgets 50/200/1000: {medians:?} in {secs:.0}s"));
}

#[test]
fn c07_sanity_ladder() {
    let start = std::time::Instant::now();
    let params = GameParams::standard(2);
    let table = Table { params: &params, budget: 1000, base: None };
    let agents = [AgentSpec::new(AgentKind::Rnd), AgentSpec::new(AgentKind::Osla), AgentSpec::new(AgentKind::Bmrh)];
    let (wr, _) = round_robin(&agents, 400, &table, 7).unwrap();
    let (osla_rnd, bmrh_rnd, bmrh_osla) = (wr.percent(1, 0).unwrap(), wr.percent(2, 0).unwrap(), wr.percent(2, 1).unwrap());
    let secs = start.elapsed().as_secs_f64();
    let ordered = wr.average(0) < wr.average(1) && wr.average(1) < wr.average(2);
    let ok = osla_rnd >= 60.0 && bmrh_rnd >= 80.0 && bmrh_osla >= 55.0 && ordered && secs < 3600.0;
    report(7, ok, &format!("OSLA v RND {osla_rnd:.2}%, BMRH v RND {bmrh_rnd:.2}%, BMRH v OSLA {bmrh_osla:.2}% in {secs:.1}s"));
}

#[test]
fn c08_multi_opponent_symmetry() {
    let params = GameParams::standard(4);
    let table = Table { params: &params, budget: DEFAULT_BUDGET, base: None };
    // a seed of its own, or all four players would make the same moves
    let me = AgentSpec { name: Some("me".into()), seed: 1, ..AgentSpec::new(AgentKind::Rnd) };
    let rep = multi_opponent(&me, &AgentSpec::new(AgentKind::Rnd), 1000, None, &table, 8).unwrap();
    report(8, (20.0..=30.0).contains(&rep.win_pct), &format!("RND vs 3 RND win rate {:.2}% over 1000 games", rep.win_pct));
}

#[test]
fn c09_reproducible_outputs() {
    let start = std::time::Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let specs = [
        ("play", r#"{"agents": [{"kind": "OSLA"}, {"kind": "BMRH"}], "games": 8}"#, vec!["results.csv"]),
        ("validate", r#"{"agents": [{"kind": "BMRH"}], "opponent": {"kind": "OSLA"}, "games": 16}"#, vec!["results.csv", "summary.csv"]),
        ("roundrobin", r#"{"agents": [{"kind": "RND"}, {"kind": "SRH"}, {"kind": "MCTS"}], "games": 6}"#, vec!["results.csv", "matrix.csv", "pairs.csv"]),
        ("multi", r#"{"agents": [{"kind": "BMRH"}], "opponent": {"kind": "RND"}, "games": 8, "baseline": 90}"#, vec!["results.csv", "summary.csv"]),
        (
            "tune",
            r#"{"agents": [{"kind": "BMRH"}], "opponent": {"kind": "OSLA"}, "budgets": [10, 20], "repetitions": 2, "validation_games": 6,
                "weights": {"mapping": "hc", "mixer": {"kind": "linear"}}}"#,
            vec!["tuning.csv", "validation.csv", "summary.csv", "results.csv", "agent.json"],
        ),
    ];
    let mut diffs = Vec::new();
    for (cmd, json, files) in &specs {
        let spec = dir.path().join(format!("{cmd}.json"));
        fs::write(&spec, json).unwrap();
        let outs: Vec<_> = ["1", "1", "4"]
            .iter()
            .enumerate()
            .map(|(i, jobs)| {
                let out = dir.path().join(format!("{cmd}-{i}"));
                let status = Command::new(env!("CARGO_BIN_EXE_r2"))
                    .args([*cmd, "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "99", "--jobs", jobs])
                    .output()
                    .unwrap();
                assert!(status.status.success(), "{cmd}: {}", String::from_utf8_lossy(&status.stderr));
                out
            })
            .collect();
        for f in files {
            let first = fs::read(outs[0].join(f)).unwrap();
            for o in &outs[1..] {
                if fs::read(o.join(f)).unwrap() != first {
                    diffs.push(format!("{cmd}/{f}"));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = if diffs.is_empty() { "all CSVs byte-identical across reruns and --jobs 4".to_string() } else { format!("differing: {}", diffs.join(", ")) };
    report(9, diffs.is_empty() && secs < 300.0, &format!("{detail} in {secs:.1}s"));
}

#[test]
fn c10_presets() {
    let hc = EventValueFunction::preset("lin_hc_star").unwrap();
    let v = hc.value(&[3.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    let id = EventValueFunction::preset("lin_id_star").unwrap();
    let n = id.weights().len();
    let ok = (v - 0.6).abs() < 1e-12 && n == 18 && n == required_weights(id.mixer()) && id.weights().validate().is_ok();
    report(10, ok, &format!("lin_hc_star([3,0,0,0,0]) = {v:.4}, lin_id_star has {n} weights"));
}
