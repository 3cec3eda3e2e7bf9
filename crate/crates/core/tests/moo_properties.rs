use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdot::moo::{
    dominates, evaluate_portfolios, CandidateAction, LinearConstraint, Metric, MetricKind, ObjectiveSpec,
};
use rdot::{ahp_weights, knee_select, pareto_filter, scalarize, solve_moo, PairwiseMatrix};
use rdot_oracles::{eigen, gen, knee, pareto, portfolio};

#[test]
fn pareto_matches_quadratic_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..600 {
        let n = rng.random_range(1..=200);
        let d = rng.random_range(1..=5);
        let pts = gen::points(&mut rng, n, d);
        let got = pareto_filter(&pts).unwrap();
        assert_eq!(got, pareto::filter(&pts));

        let front: Vec<Vec<f64>> = got.iter().map(|&i| pts[i].clone()).collect();
        let again = pareto_filter(&front).unwrap();
        assert_eq!(again, (0..front.len()).collect::<Vec<_>>(), "not idempotent");

        for (i, p) in pts.iter().enumerate() {
            if got.contains(&i) {
                assert!(!pts.iter().any(|q| dominates(q, p)));
            } else {
                assert!(front.iter().any(|f| dominates(f, p) || f == p));
            }
        }
    }
}

#[test]
fn pareto_rejects_mixed_dimensions() {
    assert!(pareto_filter(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    assert!(pareto_filter::<f64>(&[vec![]]).is_err());
    assert_eq!(pareto_filter::<f64>(&[]).unwrap(), Vec::<usize>::new());
}

#[test]
fn knee_worked_examples() {
    let f = |pts: &[(f64, f64)]| knee_select(&pts.iter().map(|p| vec![p.0, p.1]).collect::<Vec<_>>()).unwrap();
    assert_eq!(f(&[(0.0, 1.0), (0.5, 0.9), (1.0, 0.0)]), 1);
    assert_eq!(f(&[(0.0, 10.0), (5.0, 9.0), (10.0, 0.0)]), 1);
    assert_eq!(f(&[(4.0, 4.0)]), 0);
    assert_eq!(knee::knee_2d(&[(0.0, 1.0), (0.5, 0.9), (1.0, 0.0)]), 1);
}

#[test]
fn knee_is_affine_invariant_and_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let n = rng.random_range(1..=30);
        let front = gen::front_2d(&mut rng, n);
        let as_vecs = |pts: &[(f64, f64)]| pts.iter().map(|p| vec![p.0, p.1]).collect::<Vec<_>>();
        let k = knee_select(&as_vecs(&front)).unwrap();
        assert_eq!(k, knee::knee_2d(&front));

        let (a, b) = (rng.random_range(0.01..100.0), rng.random_range(-50.0..50.0));
        let (c, d) = (rng.random_range(0.01..100.0), rng.random_range(-50.0..50.0));
        let scaled: Vec<(f64, f64)> = front.iter().map(|p| (a * p.0 + b, c * p.1 + d)).collect();
        assert_eq!(knee_select(&as_vecs(&scaled)).unwrap(), k);
    }
}

#[test]
fn ahp_recovers_planted_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let n = rng.random_range(2..=9);
        let w = gen::weights(&mut rng, n);
        let r = ahp_weights(&PairwiseMatrix::from_weights(&w).unwrap()).unwrap();
        for (got, want) in r.weights.iter().zip(&w) {
            assert!((got - want).abs() < 1e-6);
        }
        assert!(r.consistency_ratio < 1e-9);
        assert!(r.acceptable);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn ahp_agrees_with_eigensolver_oracle() {
    let a = vec![vec![1.0, 2.0, 4.0], vec![0.5, 1.0, 1.0], vec![0.25, 1.0, 1.0]];
    let (lambda, w) = eigen::perron(&a);
    let r = ahp_weights(&PairwiseMatrix::new(a).unwrap()).unwrap();
    for (got, want) in r.weights.iter().zip(&w) {
        assert!((got - want).abs() < 1e-8);
    }
    assert!((r.lambda_max - lambda).abs() < 1e-8);
    let cr = (lambda - 3.0) / 2.0 / 0.58;
    assert!((r.consistency_ratio - cr).abs() < 1e-8);
    assert!((r.consistency_ratio - 0.046).abs() < 0.01);
}

#[test]
#[allow(clippy::needless_range_loop)]
fn ahp_weights_positive_on_perturbed_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..100 {
        let n = rng.random_range(3..=10);
        let mut a = vec![vec![1.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v: f64 = if rng.random_bool(0.5) {
                    rng.random_range(1..=9) as f64
                } else {
                    1.0 / rng.random_range(1..=9) as f64
                };
                a[i][j] = v;
                a[j][i] = 1.0 / v;
            }
        }
        let r = ahp_weights(&PairwiseMatrix::new(a.clone()).unwrap()).unwrap();
        assert!(r.weights.iter().all(|w| *w > 0.0));
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(r.consistency_ratio >= 0.0);
        let (lambda, _) = eigen::perron(&a);
        assert!((r.lambda_max - lambda).abs() < 1e-6, "{} vs {lambda}", r.lambda_max);
    }
}

struct RandomSpec {
    spec: ObjectiveSpec<f64>,
    baselines: Vec<f64>,
    costs: Vec<f64>,
    contrib: Vec<Vec<f64>>,
}

fn random_spec(rng: &mut ChaCha8Rng, max_candidates: usize) -> RandomSpec {
    let n = rng.random_range(1..=max_candidates);
    let d = rng.random_range(1..=3);
    let grid = rng.random_bool(0.5);
    let value = |rng: &mut ChaCha8Rng| {
        if grid {
            rng.random_range(-3..=3) as f64
        } else {
            rng.random_range(-10.0..10.0)
        }
    };
    let baselines: Vec<f64> = (0..d).map(|_| value(rng)).collect();
    let costs: Vec<f64> = (0..n).map(|_| rng.random_range(0..=4) as f64).collect();
    let contrib: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| value(rng)).collect()).collect();
    let budget = rng.random_bool(0.6).then(|| rng.random_range(0..=2 * n) as f64);
    let spec = ObjectiveSpec {
        metrics: baselines
            .iter()
            .enumerate()
            .map(|(m, b)| Metric {
                id: format!("m{m}"),
                name: String::new(),
                kind: if m == 0 { MetricKind::Performance } else { MetricKind::Surrogate },
                baseline: *b,
            })
            .collect(),
        candidates: (0..n)
            .map(|c| CandidateAction {
                id: format!("x{c}"),
                strategy_id: None,
                cost: costs[c],
                contributions: (0..d).map(|m| (format!("m{m}"), contrib[c][m])).collect(),
            })
            .collect(),
        budget,
        constraints: vec![],
    };
    RandomSpec {
        spec,
        baselines,
        costs,
        contrib,
    }
}

fn mask_of(p: &rdot::moo::Portfolio) -> u64 {
    p.selected().fold(0, |acc, i| acc | 1 << i)
}

#[test]
fn solve_moo_matches_enumeration_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..150 {
        let r = random_spec(&mut rng, 12);
        let all = portfolio::enumerate(&r.baselines, &r.costs, &r.contrib, r.spec.budget);
        let sol = solve_moo(&r.spec, None).unwrap();
        let vectors: Vec<Vec<f64>> = all.iter().map(|(_, v)| v.clone()).collect();
        let want: Vec<u64> = pareto::filter(&vectors).into_iter().map(|i| all[i].0).collect();
        let got: Vec<u64> = sol.frontier.iter().map(|p| mask_of(&p.portfolio)).collect();
        assert_eq!(got, want);
        assert_eq!(sol.feasible, all.len());
        assert_eq!(sol.dominated_count, all.len() - want.len());
        for (p, m) in sol.frontier.iter().zip(&want) {
            let expect = &all.iter().find(|(mask, _)| mask == m).unwrap().1;
            assert_eq!(&p.objectives, expect);
        }
        assert!(sol.knee_index < sol.frontier.len());
    }
}

#[test]
fn weighted_argmax_lies_on_the_frontier() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for _ in 0..150 {
        let r = random_spec(&mut rng, 10);
        let w = gen::weights(&mut rng, r.spec.metrics.len());
        let sol = solve_moo(&r.spec, Some(&w)).unwrap();
        let all = evaluate_portfolios(&r.spec).unwrap();
        let best = all
            .iter()
            .max_by(|a, b| {
                scalarize(&w, &a.objectives)
                    .unwrap()
                    .partial_cmp(&scalarize(&w, &b.objectives).unwrap())
                    .unwrap()
            })
            .unwrap();
        assert!(sol.frontier.iter().any(|p| p.objectives == best.objectives));

        let ranking = sol.ranking.unwrap();
        assert_eq!(ranking.len(), sol.frontier.len());
        for pair in ranking.windows(2) {
            assert!(pair[0].score >= pair[1].score);
            if pair[0].score == pair[1].score {
                assert!(pair[0].frontier_index < pair[1].frontier_index);
            }
        }
        let top = scalarize(&w, &best.objectives).unwrap();
        assert!((ranking[0].score - top).abs() < 1e-9);
    }
}

#[test]
fn linear_constraints_filter_portfolios() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for _ in 0..50 {
        let mut r = random_spec(&mut rng, 8);
        let n = r.spec.candidates.len();
        let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(0..=3) as f64).collect();
        let bound = rng.random_range(0..=n) as f64;
        r.spec.constraints.push(LinearConstraint {
            name: "k".into(),
            coeffs: coeffs.iter().enumerate().map(|(c, a)| (format!("x{c}"), *a)).collect::<BTreeMap<_, _>>(),
            bound,
        });
        let all = evaluate_portfolios(&r.spec).unwrap();
        let expected = portfolio::enumerate(&r.baselines, &r.costs, &r.contrib, r.spec.budget)
            .into_iter()
            .filter(|(mask, _)| (0..n).filter(|c| mask >> c & 1 == 1).map(|c| coeffs[c]).sum::<f64>() <= bound)
            .map(|(mask, _)| mask)
            .collect::<Vec<_>>();
        assert_eq!(all.iter().map(|p| mask_of(&p.portfolio)).collect::<Vec<_>>(), expected);
    }
}

proptest! {
    #[test]
    fn scalarize_is_linear(
        v in prop::collection::vec(-100.0f64..100.0, 1..6),
        raw in prop::collection::vec(0.01f64..1.0, 6),
    ) {
        let s: f64 = raw[..v.len()].iter().sum();
        let w: Vec<f64> = raw[..v.len()].iter().map(|x| x / s).collect();
        let want: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        prop_assert!((scalarize(&w, &v).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn pareto_output_is_mutually_nondominated(
        pts in prop::collection::vec(prop::collection::vec(0u8..5, 3), 1..60),
    ) {
        let pts: Vec<Vec<f64>> = pts.into_iter().map(|p| p.into_iter().map(f64::from).collect()).collect();
        let front = pareto_filter(&pts).unwrap();
        for &i in &front {
            for &j in &front {
                prop_assert!(!dominates(&pts[i], &pts[j]));
                if i != j {
                    prop_assert!(pts[i] != pts[j]);
                }
            }
        }
    }

    #[test]
    fn knee_index_is_in_range(
        pts in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 2..5), 1..40),
    ) {
        let d = pts[0].len();
        let pts: Vec<Vec<f64>> = pts.into_iter().filter(|p| p.len() == d).collect();
        let front: Vec<Vec<f64>> = pareto_filter(&pts).unwrap().into_iter().map(|i| pts[i].clone()).collect();
        prop_assert!(knee_select(&front).unwrap() < front.len());
    }
}
