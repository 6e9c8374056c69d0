use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use rail::mdp::StateVec;
use rail::policy::{
    bootstrap_committee, objective_and_gradient, softmax, train_logistic, train_logistic_with_report, Committee,
    Dataset, LinearPolicy, TrainConfig,
};
use rail::select::{entropy_of_votes, vote_entropy};
use rail::RngStream;

fn random_dataset(rng: &mut RngStream, n: usize, actions: usize, dim: usize) -> Dataset {
    let mut d = Dataset::new(actions, dim);
    for _ in 0..n {
        let mut x: Vec<f64> = (0..dim - 1).map(|_| rng.uniform(-2.0, 2.0)).collect();
        x.push(1.0);
        d.push(StateVec::new(x).unwrap(), rng.index(actions)).unwrap();
    }
    d
}

/// Worst relative error between the analytic gradient and central differences.
fn gradient_check(data: &Dataset, w: &[f64], l2: f64) -> f64 {
    let (_, g) = objective_and_gradient(data, w, l2);
    let h = 1e-5;
    let fd: Vec<f64> = (0..w.len())
        .map(|i| {
            let mut plus = w.to_vec();
            let mut minus = w.to_vec();
            plus[i] += h;
            minus[i] -= h;
            (objective_and_gradient(data, &plus, l2).0 - objective_and_gradient(data, &minus, l2).0) / (2.0 * h)
        })
        .collect();
    let diff: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale = g.iter().map(|a| a * a).sum::<f64>().sqrt().max(fd.iter().map(|a| a * a).sum::<f64>().sqrt());
    diff / scale.max(1e-12)
}

#[test]
fn gradient_matches_central_differences_at_twenty_points() {
    let mut rng = RngStream::new(11, 0);
    for i in 0..20 {
        let actions = 2 + i % 3;
        let data = random_dataset(&mut rng, 30, actions, 4);
        let w: Vec<f64> = (0..actions * 4).map(|_| rng.uniform(-1.5, 1.5)).collect();
        let err = gradient_check(&data, &w, 1e-3);
        assert!(err < 1e-4, "point {i}: relative error {err:e}");
    }
}

#[test]
fn vote_entropy_closed_forms() {
    assert_abs_diff_eq!(entropy_of_votes(&[5, 0]), 0.0, epsilon = 1e-9);
    assert_abs_diff_eq!(entropy_of_votes(&[1, 1, 1, 1, 1]), 5f64.ln(), epsilon = 1e-9);
    let split = -(0.6 * 0.6f64.ln() + 0.4 * 0.4f64.ln());
    assert_abs_diff_eq!(entropy_of_votes(&[3, 2]), split, epsilon = 1e-9);
    assert_abs_diff_eq!(split, 0.6730, epsilon = 1e-4);
}

#[test]
fn unanimous_committee_has_zero_entropy() {
    let p = LinearPolicy::from_weights(2, 2, vec![1.0, 0.0, -1.0, 0.0], "t").unwrap();
    let c = Committee::new(vec![p.clone(), p.clone(), p]).unwrap();
    assert_eq!(vote_entropy(&c, &[0.3, 1.0]), 0.0);
}

#[test]
fn separable_two_class_set_is_fit_exactly() {
    let mut rng = RngStream::new(3, 0);
    let mut d = Dataset::new(2, 3);
    for i in 0..20 {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let x = [sign * rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0), 1.0];
        d.push(StateVec::new(x.to_vec()).unwrap(), usize::from(sign > 0.0)).unwrap();
    }
    let p = train_logistic(&d, &TrainConfig::default(), "t").unwrap();
    assert!(d.iter().all(|(x, y)| p.act(x.values()) == *y));
}

#[test]
fn converged_fit_meets_gradient_tolerance() {
    let data = random_dataset(&mut RngStream::new(5, 0), 40, 3, 3);
    let cfg = TrainConfig::default();
    let (p, report) = train_logistic_with_report(&data, &cfg, "t").unwrap();
    assert!(report.converged);
    let (_, g) = objective_and_gradient(&data, p.weights(), cfg.l2);
    assert!(g.iter().map(|x| x * x).sum::<f64>().sqrt() <= cfg.grad_tol);
}

#[test]
fn training_is_bitwise_reproducible() {
    let data = random_dataset(&mut RngStream::new(8, 0), 25, 3, 4);
    let a = train_logistic(&data, &TrainConfig::default(), "t").unwrap();
    let b = train_logistic(&data, &TrainConfig::default(), "t").unwrap();
    assert_eq!(a.weights(), b.weights());
}

#[test]
fn singleton_dataset_gives_identical_members() {
    let mut d = Dataset::new(2, 2);
    d.push(StateVec::new(vec![0.4, 1.0]).unwrap(), 1).unwrap();
    let c = bootstrap_committee(&d, 5, &TrainConfig::default(), "t", &mut RngStream::new(0, 0)).unwrap();
    assert_eq!(c.len(), 5);
    assert!(c.members().iter().all(|m| m == &c.members()[0]));
}

#[test]
fn policy_text_round_trip_is_exact() {
    let data = random_dataset(&mut RngStream::new(2, 0), 30, 3, 4);
    let p = train_logistic(&data, &TrainConfig::default(), "round-trip").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    p.save(&path).unwrap();
    assert_eq!(LinearPolicy::load(&path).unwrap(), p);
}

proptest! {
    #[test]
    fn objective_never_increases(seed in 0u64..500) {
        let data = random_dataset(&mut RngStream::new(seed, 1), 15, 3, 3);
        let cfg = TrainConfig { max_iters: 200, ..TrainConfig::default() };
        let (_, report) = train_logistic_with_report(&data, &cfg, "t").unwrap();
        for w in report.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn probabilities_sum_to_one(w in prop::collection::vec(-20.0f64..20.0, 12), x in prop::collection::vec(-5.0f64..5.0, 3)) {
        let p = LinearPolicy::from_weights(4, 3, w, "t").unwrap();
        let probs = p.predict_proba(&x);
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        let best = probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(probs[p.act(&x)], best);
    }

    #[test]
    fn positive_scaling_keeps_the_action(w in prop::collection::vec(-3.0f64..3.0, 6), x in prop::collection::vec(-2.0f64..2.0, 3), c in 1.0f64..50.0) {
        let p = LinearPolicy::from_weights(2, 3, w, "t").unwrap();
        prop_assert_eq!(p.act(&x), p.scale(c).act(&x));
    }

    #[test]
    fn shared_shift_keeps_the_action(w in prop::collection::vec(-3.0f64..3.0, 9), x in prop::collection::vec(-2.0f64..2.0, 3), shift in prop::collection::vec(-4.0f64..4.0, 3)) {
        // Adding the same vector to every row adds the same score to every action.
        let mut shifted = w.clone();
        for row in shifted.chunks_mut(3) {
            for (v, s) in row.iter_mut().zip(&shift) {
                *v += s;
            }
        }
        let a = LinearPolicy::from_weights(3, 3, w, "t").unwrap();
        let b = LinearPolicy::from_weights(3, 3, shifted, "t").unwrap();
        let pa = a.predict_proba(&x);
        let pb = b.predict_proba(&x);
        for (u, v) in pa.iter().zip(&pb) {
            prop_assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn softmax_is_shift_invariant(s in prop::collection::vec(-30.0f64..30.0, 1..6), c in -100.0f64..100.0) {
        let a = softmax(&s);
        let b = softmax(&s.iter().map(|v| v + c).collect::<Vec<_>>());
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() < 1e-9);
        }
    }
}
