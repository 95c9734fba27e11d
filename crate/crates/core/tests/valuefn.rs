use proptest::prelude::*;
use r2_core::engine::*;
use r2_core::events::{synthesize, TypeMapping};
use r2_core::valuefn::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent oracle: explicit nested loops for each degree.
fn naive_poly(n: usize, d: usize, w: &[f64], t: &[f64]) -> f64 {
    let mut idx = 0;
    let mut sum = 0.0;
    match d {
        1 => {
            for i in 0..n {
                sum += w[idx] * t[i];
                idx += 1;
            }
        }
        2 => {
            for i in 0..n {
                for j in i..n {
                    sum += w[idx] * t[i] * t[j];
                    idx += 1;
                }
            }
        }
        3 => {
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        sum += w[idx] * t[i] * t[j] * t[k];
                        idx += 1;
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    assert_eq!(idx, w.len());
    sum
}

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, i| acc * (n - k + i) / i)
}

#[test]
fn weight_table() {
    let cases = [
        (Mixer::linear(5), 5),
        (Mixer::polynomial(5, 2), 15),
        (Mixer::polynomial(5, 3), 35),
        (Mixer::linear(18), 18),
        (Mixer::polynomial(18, 2), 171),
        (Mixer::polynomial(18, 3), 1140),
    ];
    for (m, want) in cases {
        assert_eq!(required_weights(&m), want, "{m:?}");
    }
}

#[test]
fn monomial_count_matches_formula() {
    for n in 1..=20 {
        for d in 1..=3 {
            let list = enumerate_monomials(n, d);
            assert_eq!(list.len(), required_weights(&Mixer::polynomial(n, d as u32)));
            assert_eq!(list.len() as u64, binomial((n + d - 1) as u64, d as u64));
            assert!(list.iter().all(|t| t.windows(2).all(|p| p[0] <= p[1]) && t.iter().all(|&i| i < n)));
            assert!(list.windows(2).all(|p| p[0] < p[1]), "strictly lexicographic");
        }
    }
    assert_eq!(enumerate_monomials(5, 3).len(), 35);
}

#[test]
fn polynomial_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for n in 1..=5 {
        for d in 1..=3 {
            let m = Mixer::polynomial(n, d as u32);
            for _ in 0..100 {
                let w: Vec<f64> = (0..required_weights(&m)).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let t: Vec<f64> = (0..n).map(|_| rng.gen_range(0..6) as f64 + rng.gen::<f64>()).collect();
                let got = eval_mixer(&m, &w, &t).unwrap();
                let want = naive_poly(n, d, &w, &t);
                assert!((got - want).abs() <= 1e-9 * want.abs().max(1e-12), "n={n} d={d}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn worked_examples() {
    // w1 t0^2 + w2 t0 t1 + w3 t1^2
    let m = Mixer::polynomial(2, 2);
    let (t0, t1) = (2.0, 3.0);
    let w = [0.5, -1.0, 2.0];
    assert_eq!(eval_mixer(&m, &w, &[t0, t1]).unwrap(), w[0] * t0 * t0 + w[1] * t0 * t1 + w[2] * t1 * t1);
    assert_eq!(eval_mixer(&m, &[1.0, 1.0, 1.0], &[2.0, 3.0]).unwrap(), 19.0);
    let lin = Mixer::linear(5);
    let v = eval_mixer(&lin, &[0.2, 0.2, -0.4, -0.6, 0.8], &[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
    assert!((v - 0.8).abs() < 1e-12);
    for m in [Mixer::linear(4), Mixer::polynomial(4, 2), Mixer::polynomial(4, 3)] {
        assert_eq!(eval_mixer(&m, &vec![0.0; required_weights(&m)], &[1.0, 2.0, 3.0, 4.0]).unwrap(), 0.0);
    }
}

#[test]
fn presets() {
    let hc = EventValueFunction::preset("lin_hc_star").unwrap();
    assert!((hc.value(&[3.0, 0.0, 0.0, 0.0, 0.0]).unwrap() - 0.6).abs() < 1e-12);
    let id = EventValueFunction::preset("lin_id_star").unwrap();
    assert_eq!(id.weights().len(), 18);
    assert_eq!(id.weights().len(), required_weights(id.mixer()));
}

fn take3() -> Action {
    Action::TakeDifferent { suits: TokenVector::new([1, 1, 1, 0, 0]), returns: TokenBundle::EMPTY }
}

#[test]
fn evaluate_take_different_with_hc_preset() {
    let s = GameState::standard(2, 0);
    let vf = ValueFunction::Event(EventValueFunction::preset("lin_hc_star").unwrap());
    let mut seq = vec![take3()];
    let mut meter = BudgetMeter::new(10);
    let r = evaluate_sequence(&s, &mut seq, &vf, EvalConfig::default(), &mut meter, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert!((r.value - 0.6).abs() < 1e-12);
    assert_eq!(meter.used(), 1);
    assert_eq!(seq, vec![take3()]);
}

#[test]
fn evaluate_zero_weights_is_zero() {
    let s = GameState::standard(2, 4);
    let vf = ValueFunction::Event(EventValueFunction::zeros(TypeMapping::identity(), MixerKind::Polynomial { degree: 2 }).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut seq: Vec<Action> = (0..5).map(|i| s.sample_action(i)).collect();
    let r = evaluate_sequence(&s, &mut seq, &vf, EvalConfig::default(), &mut BudgetMeter::new(100), &mut rng).unwrap();
    assert_eq!(r.value, 0.0);
}

#[test]
fn score_baseline_counts_points() {
    let mut s = GameState::standard(2, 0);
    let c = Card { id: 1000, tier: 0, points: 2, bonus: 1, cost: TokenVector::new([0, 0, 2, 0, 0]) };
    let old = s.face_up[0][0].replace(c).unwrap();
    s.decks[0].push(old);
    s.table_tokens[2] -= 2;
    s.players[0].tokens[2] += 2;
    let mut seq = vec![Action::BuyFaceUp { deck: 0, slot: 0, payment: s.players[0].canonical_payment(&c) }];
    let r = evaluate_sequence(&s, &mut seq, &ValueFunction::Score, EvalConfig::default(), &mut BudgetMeter::new(5), &mut ChaCha8Rng::seed_from_u64(0))
        .unwrap();
    assert_eq!(r.value, 2.0);
}

#[test]
fn budget_accounting_and_refusal() {
    let s = GameState::standard(2, 0);
    let vf = ValueFunction::Score;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut seq: Vec<Action> = vec![take3(); 3];
    let mut meter = BudgetMeter::new(1000);
    let r = evaluate_sequence(&s, &mut seq, &vf, EvalConfig::default(), &mut meter, &mut rng).unwrap();
    // three own moves plus the two opponent moves between them
    assert_eq!((r.played, meter.used()), (3, 5));

    let passing = EvalConfig { opponent: OpponentModel::Passing, discount: 1.0 };
    let mut meter = BudgetMeter::new(1000);
    evaluate_sequence(&s, &mut seq, &vf, passing, &mut meter, &mut rng).unwrap();
    assert_eq!(meter.used(), 3);

    let mut meter = BudgetMeter::new(2);
    let r = evaluate_sequence(&s, &mut seq, &vf, EvalConfig::default(), &mut meter, &mut rng).unwrap();
    assert_eq!((r.played, r.exhausted, meter.used()), (1, true, 2));
    assert!(matches!(
        evaluate_sequence(&s, &mut seq, &vf, EvalConfig::default(), &mut meter, &mut rng),
        Err(ValueError::BudgetExhausted)
    ));
}

#[test]
fn illegal_actions_are_repaired_and_reported() {
    let s = GameState::standard(2, 0);
    let bad = Action::BuyFaceUp { deck: 2, slot: 3, payment: TokenBundle::EMPTY };
    let mut seq = vec![bad, take3()];
    evaluate_sequence(&s, &mut seq, &ValueFunction::Score, EvalConfig::default(), &mut BudgetMeter::new(50), &mut ChaCha8Rng::seed_from_u64(8))
        .unwrap();
    assert_ne!(seq[0], bad);
    assert!(s.is_legal(&seq[0]));
}

#[test]
fn discount_weights_each_step() {
    // with the passing opponent the events of each own step are easy to recompute
    let s = GameState::standard(2, 7);
    let f = EventValueFunction::preset("lin_hc_star").unwrap();
    let vf = ValueFunction::Event(f.clone());
    let cfg = EvalConfig { opponent: OpponentModel::Passing, discount: 0.9 };
    let mut seq: Vec<Action> = Vec::new();
    let mut probe = s.clone();
    for k in 0..4 {
        let a = probe.sample_action(k);
        probe.apply_action(a).unwrap();
        probe.skip_turn().unwrap();
        seq.push(a);
    }
    let r = evaluate_sequence(&s, &mut seq.clone(), &vf, cfg, &mut BudgetMeter::new(50), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let mut want = 0.0;
    let mut replay = s.clone();
    for (i, a) in seq.iter().enumerate() {
        let ev = replay.apply_action(*a).unwrap();
        replay.skip_turn().unwrap();
        want += 0.9f64.powi(i as i32) * f.value(&synthesize(&ev, 0, f.mapping())).unwrap();
    }
    assert!((r.value - want).abs() < 1e-12, "{} vs {want}", r.value);
}

fn random_events(seed: u64, moves: usize) -> Vec<r2_core::events::Event> {
    let mut s = GameState::standard(2, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..moves {
        if s.is_terminal() {
            break;
        }
        let a = s.sample_action_with(&mut rng);
        out.extend(s.apply_action(a).unwrap());
    }
    out
}

fn grid_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| WEIGHT_GRID[rng.gen_range(0..WEIGHT_GRID.len())]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_is_additive(seed in any::<u64>(), a in 0usize..60, b in 0usize..60, id in any::<bool>()) {
        let mapping = if id { TypeMapping::identity() } else { TypeMapping::hand_crafted() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = EventValueFunction::new(mapping, MixerKind::Linear, grid_weights(&mut rng, mapping.group_count()).into()).unwrap();
        let all = random_events(seed, a + b);
        let cut = all.len().min(a * 4);
        let (e1, e2) = all.split_at(cut);
        for p in 0..2 {
            let whole = f.value_of_events(&all, p);
            let parts = f.value_of_events(e1, p) + f.value_of_events(e2, p);
            prop_assert!((whole - parts).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_ranking_is_scale_invariant(seed in any::<u64>(), c in 0.01f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = {
            let mut s = GameState::standard(2, seed);
            for _ in 0..rng.gen_range(0..30) {
                if s.is_terminal() { break; }
                let a = s.sample_action_with(&mut rng);
                s.apply_action(a).unwrap();
            }
            s
        };
        prop_assume!(!s.is_terminal());
        let w = grid_weights(&mut rng, 18);
        let base = EventValueFunction::new(TypeMapping::identity(), MixerKind::Linear, w.clone().into()).unwrap();
        let scaled = base.with_weights(w.iter().map(|x| x * c).collect::<Vec<_>>().into()).unwrap();
        let candidates: Vec<Vec<Action>> = (0..8).map(|i| {
            let mut probe = s.clone();
            let mut seq = Vec::new();
            for k in 0..3 {
                if probe.is_terminal() { break; }
                let a = probe.sample_action(seed ^ (i * 31 + k));
                probe.apply_action(a).unwrap();
                seq.push(a);
            }
            seq
        }).collect();
        let score = |f: &EventValueFunction| -> Vec<f64> {
            let vf = ValueFunction::Event(f.clone());
            candidates.iter().enumerate().map(|(i, seq)| {
                let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
                let cfg = EvalConfig { opponent: OpponentModel::Passing, discount: 1.0 };
                evaluate_sequence(&s, &mut seq.clone(), &vf, cfg, &mut BudgetMeter::new(100), &mut rng).unwrap().value
            }).collect()
        };
        let argmax = |v: &[f64]| v.iter().enumerate().fold(0, |best, (i, x)| if *x > v[best] { i } else { best });
        let (a, b) = (score(&base), score(&scaled));
        // ranking, not value, is invariant; compare on exact multiples to avoid rounding flips
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x * c - y).abs() <= 1e-9 * (1.0 + y.abs()));
        }
        let (ia, ib) = (argmax(&a), argmax(&b));
        prop_assert!(ia == ib || (a[ia] - a[ib]).abs() < 1e-9);
    }

    #[test]
    fn evaluation_never_mutates_input(seed in any::<u64>(), len in 1usize..6) {
        let s = GameState::standard(2, seed);
        let before = serde_json::to_string(&s).unwrap();
        let vf = ValueFunction::Event(EventValueFunction::preset("lin_id_star").unwrap());
        let mut seq: Vec<Action> = (0..len as u64).map(|i| s.sample_action(seed ^ i)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        evaluate_sequence(&s, &mut seq, &vf, EvalConfig::default(), &mut BudgetMeter::new(1000), &mut rng).unwrap();
        prop_assert_eq!(serde_json::to_string(&s).unwrap(), before);
    }
}
