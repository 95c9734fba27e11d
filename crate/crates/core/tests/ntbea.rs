use std::collections::HashMap;

use r2_core::agents::BmrhConfig;
use r2_core::ntbea::*;
use r2_core::valuefn::{required_weights, Mixer, WEIGHT_GRID};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of dimensions at their top value, for an 11-value space.
fn max_value(c: &[usize]) -> f64 {
    c.iter().filter(|&&v| v == 10).count() as f64
}

/// OneMax read through a channel that flips each bit with probability 0.2.
fn noisy_onemax(c: &[usize], rng: &mut ChaCha8Rng) -> f64 {
    c.iter().map(|&b| if rng.gen::<f64>() < 0.2 { 1 - b } else { b }).sum::<usize>() as f64
}

#[test]
fn space_json_validation() {
    let ok = r#"[{"name": "a", "values": [1, 2]}, {"name": "b", "values": ["x", "y", "z"]}]"#;
    let s = SearchSpace::from_json(ok).unwrap();
    assert_eq!(s.len(), 2);
    assert_eq!(s.radix(1), 3);
    assert_eq!(SearchSpace::from_json(&s.to_json()).unwrap(), s);
    assert!(matches!(SearchSpace::from_json(r#"[{"name": "a", "values": [1]}]"#), Err(NtbeaError::TooFewValues(_))));
    assert!(matches!(
        SearchSpace::from_json(r#"[{"name": "a", "values": [1, 2]}, {"name": "a", "values": [3, 4]}]"#),
        Err(NtbeaError::DuplicateName(_))
    ));
}

#[test]
fn combined_spaces() {
    let bmrh = BmrhConfig::search_space();
    assert_eq!(bmrh.len(), 10);
    let lin = SearchSpace::weight_grid(required_weights(&Mixer::linear(5)));
    assert_eq!(combine_spaces(&bmrh, &lin).unwrap().len(), 15);
    let poly = SearchSpace::weight_grid(required_weights(&Mixer::polynomial(18, 2)));
    assert_eq!(combine_spaces(&bmrh, &poly).unwrap().len(), 181);
    assert_eq!(combine_spaces(&bmrh, &SearchSpace::default()).unwrap(), bmrh);
    assert!(combine_spaces(&bmrh, &bmrh).is_err());
    for d in lin.dims() {
        let vals: Vec<f64> = d.values.iter().map(|v| v.as_f64().unwrap()).collect();
        assert_eq!(vals, WEIGHT_GRID);
    }
}

#[test]
fn every_bmrh_candidate_builds() {
    let space = BmrhConfig::search_space();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..500 {
        let c = space.random(&mut rng);
        let cfg = BmrhConfig::from_map(&space.to_map(&c)).unwrap();
        assert!(cfg.elite_count <= cfg.population_size);
    }
}

#[test]
fn ucb_single_observation() {
    let space = SearchSpace::integer(1, 3);
    let mut m = NTupleModel::with_tuples(&space, vec![vec![0]]);
    m.add(&[1], 1.0);
    assert!((m.ucb_estimate(&[1], 1.0) - 1.8326).abs() < 1e-4);
    assert_eq!(m.ucb_estimate(&[1], 0.0), 1.0);
    // an unseen pattern only has exploration, which is huge
    assert!(m.ucb_estimate(&[2], 1.0) > m.ucb_estimate(&[1], 1.0));
}

#[test]
fn pure_exploitation_is_the_mean() {
    let space = SearchSpace::integer(2, 2);
    let mut m = NTupleModel::new(&space, TupleScheme::OneTwoN).unwrap();
    for (c, f) in [([0, 0], 1.0), ([0, 1], 2.0), ([1, 1], 4.0), ([0, 0], 3.0)] {
        m.add(&c, f);
    }
    // tuples (0), (1), (0, 1)
    let expect = ((1.0 + 2.0 + 3.0) / 3.0 + (1.0 + 3.0) / 2.0 + 2.0) / 3.0;
    assert!((m.ucb_estimate(&[0, 0], 0.0) - expect).abs() < 1e-12);
    assert_eq!(m.mean_estimate(&[0, 0]), Some(expect));
    assert!(m.mean_estimate(&[1, 0]).is_some());
    assert_eq!(NTupleModel::new(&space, TupleScheme::OneTwoN).unwrap().mean_estimate(&[1, 0]), None);
}

#[test]
fn model_matches_brute_force_means() {
    let space = SearchSpace::integer(4, 3);
    let mut m = NTupleModel::new(&space, TupleScheme::OneN).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut seen: Vec<(Vec<usize>, f64)> = Vec::new();
    for _ in 0..300 {
        let c = space.random(&mut rng);
        let f: f64 = rng.gen();
        m.add(&c, f);
        seen.push((c, f));
    }
    assert_eq!(m.evaluations(), 300);
    for dim in 0..4 {
        for v in 0..3 {
            let fs: Vec<f64> = seen.iter().filter(|(c, _)| c[dim] == v).map(|(_, f)| *f).collect();
            let probe: Vec<usize> = (0..4).map(|d| if d == dim { v } else { 0 }).collect();
            let s = m.stats(dim, &probe);
            assert_eq!(s.count as usize, fs.len());
            assert!((s.mean().unwrap() - fs.iter().sum::<f64>() / fs.len() as f64).abs() < 1e-12);
        }
    }
    let mut full: HashMap<&[usize], Vec<f64>> = HashMap::new();
    for (c, f) in &seen {
        full.entry(c).or_default().push(*f);
    }
    for (c, fs) in full {
        assert_eq!(m.stats(4, c).count as usize, fs.len());
    }
}

#[test]
fn neighbour_epsilon_semantics() {
    let space = SearchSpace::integer(6, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let base = vec![1, 2, 3, 0, 1, 2];
    let diff = |n: &[usize]| n.iter().zip(&base).filter(|(a, b)| a != b).count();
    for _ in 0..1000 {
        assert_eq!(diff(&mutate_neighbor(&base, &space, 1.0, &mut rng)), 1);
    }
    let two = SearchSpace::integer(2, 3);
    for _ in 0..1000 {
        let n = mutate_neighbor(&[0, 0], &two, 0.0, &mut rng);
        assert!(n[0] != 0 && n[1] != 0);
    }
    let single = (0..10_000).filter(|_| diff(&mutate_neighbor(&base, &space, 0.7, &mut rng)) == 1).count();
    let frac = single as f64 / 10_000.0;
    assert!((frac - 0.7).abs() < 0.02, "{frac}");
}

#[test]
fn exact_budget_and_determinism() {
    let space = SearchSpace::integer(5, 11);
    for budget in [1, 2, 37, 200] {
        let cfg = NtbeaConfig { budget, ..NtbeaConfig::default() };
        let mut calls = 0;
        let r = ntbea_optimize(&space, &cfg, 5, |c, i| {
            assert_eq!(i, calls);
            calls += 1;
            max_value(c)
        })
        .unwrap();
        assert_eq!(calls, budget);
        assert_eq!(r.log.len(), budget);
        assert_eq!(r.model.evaluations(), budget as u64);
        let again = ntbea_optimize(&space, &cfg, 5, |c, _| max_value(c)).unwrap();
        assert_eq!(again.best, r.best);
        assert_eq!(again.log, r.log);
        if budget == 1 {
            assert_eq!(r.best, r.log[0].candidate);
        }
    }
}

#[test]
fn recommendation_was_evaluated() {
    let space = SearchSpace::integer(3, 11);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let r = ntbea_optimize(&space, &NtbeaConfig { budget: 60, ..Default::default() }, 2, |c, _| max_value(c) + rng.gen::<f64>()).unwrap();
    assert!(r.log.iter().any(|e| e.candidate == r.best));
    assert!(space.contains(&r.best));
}

#[test]
fn config_validation() {
    assert!(NtbeaConfig { epsilon: 1.5, ..Default::default() }.validate().is_err());
    assert!(NtbeaConfig { budget: 0, ..Default::default() }.validate().is_err());
    let cfg: NtbeaConfig = serde_json::from_str(r#"{"k": 2.0, "tupleScheme": "1+N"}"#).unwrap();
    assert_eq!(cfg.tuple_scheme, TupleScheme::OneN);
    assert_eq!(cfg.budget, 500);
}

#[test]
fn log_csv_layout() {
    let space = SearchSpace::from_json(r#"[{"name": "len", "values": [1, 2]}, {"name": "mode", "values": ["a", "b"]}]"#).unwrap();
    let log = vec![Evaluation { iteration: 0, candidate: vec![1, 0], fitness: 0.5 }];
    let mut out = Vec::new();
    write_log_csv(&space, &log, &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "iteration,len,mode,fitness\n0,2,a,0.5000\n");
}

#[test]
fn recovers_noiseless_max_value() {
    let space = SearchSpace::integer(5, 11);
    let cfg = NtbeaConfig::default();
    let hits = (0..100).filter(|&s| ntbea_optimize(&space, &cfg, s, |c, _| max_value(c)).unwrap().best == vec![10; 5]).count();
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn recovers_noisy_onemax() {
    let space = SearchSpace::integer(10, 2);
    let cfg = NtbeaConfig::default();
    let hits = (0..100)
        .filter(|&s| {
            let mut noise = ChaCha8Rng::seed_from_u64(s + 1000);
            ntbea_optimize(&space, &cfg, s, |c, _| noisy_onemax(c, &mut noise)).unwrap().best == vec![1; 10]
        })
        .count();
    assert!(hits >= 70, "{hits}/100");
}
