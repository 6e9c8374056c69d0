use proptest::prelude::*;

use rail::env::DiscreteMdp;
use rail::mdp::{estimate_value, sample_d_t};
use rail::theory::{
    check_lemma1, check_lemma2, enumerate_trajectories, exact_value, state_marginals, verify_theory, Tabular,
    VerifyConfig,
};
use rail::RngStream;

fn random_mdp(seed: u64, n: usize, m: usize, horizon: usize) -> DiscreteMdp {
    DiscreteMdp::random(n, m, horizon, 1.0, &mut RngStream::new(seed, 0)).unwrap()
}

fn random_table(seed: u64, n: usize, m: usize) -> Tabular {
    let mut rng = RngStream::new(seed, 1);
    Tabular::Stationary((0..n).map(|_| rng.index(m)).collect())
}

#[test]
fn exact_value_agrees_with_monte_carlo() {
    for seed in 0..5 {
        let mdp = random_mdp(seed, 5, 3, 5);
        let table = random_table(seed, 5, 3);
        let exact = exact_value(&mdp, &table).unwrap();
        let t = table.clone();
        let mc = estimate_value(&mdp, &move |s: &usize| t.act(*s, 0), 20_000, &mut RngStream::new(seed, 2)).unwrap();
        assert!(
            (mc.mean - exact).abs() <= 4.0 * mc.stderr + 1e-12,
            "seed {seed}: exact {exact}, mc {} ± {}",
            mc.mean,
            mc.stderr
        );
    }
}

#[test]
fn sampled_d_t_matches_exact_marginals() {
    let mdp = random_mdp(3, 6, 2, 5);
    let table = random_table(3, 6, 2);
    let exact = state_marginals(&mdp, &table).unwrap();
    let draws = 20_000;
    let mut rng = RngStream::new(9, 0);
    for t in 1..=5 {
        let t_table = table.clone();
        let states = sample_d_t(&mdp, &move |s: &usize| t_table.act(*s, 0), t, draws, &mut rng).unwrap();
        let mut counts = [0usize; 6];
        for s in states {
            counts[s] += 1;
        }
        // Pearson chi-square over states with nonzero mass; 5 dof at p = 0.001 is 20.5.
        let mut chi2 = 0.0;
        let mut tv = 0.0;
        for (s, &c) in counts.iter().enumerate() {
            let p = exact[t - 1][s];
            let f = c as f64 / draws as f64;
            tv += 0.5 * (f - p).abs();
            if p > 0.0 {
                chi2 += (c as f64 - draws as f64 * p).powi(2) / (draws as f64 * p);
            } else {
                assert_eq!(c, 0, "state {s} has zero mass at t={t}");
            }
        }
        assert!(chi2 < 20.5, "t={t}: chi2 {chi2}");
        assert!(tv < 0.02, "t={t}: tv {tv}");
    }
}

#[test]
fn marginals_are_distributions() {
    let mdp = random_mdp(4, 6, 3, 5);
    let d = state_marginals(&mdp, &random_table(4, 6, 3)).unwrap();
    assert_eq!(d.len(), 5);
    for row in d {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn oversized_enumeration_is_refused() {
    let mdp = random_mdp(0, 12, 4, 6);
    let table = random_table(0, 12, 4);
    assert!(matches!(
        enumerate_trajectories(&mdp, &table, 6),
        Err(rail::Error::SizeGuard { .. })
    ));
}

#[test]
fn empty_suites_pass() {
    let cfg = VerifyConfig {
        lemma1: 0,
        lemma2: 0,
        theorem1: 0,
        proposition1: 0,
        ..VerifyConfig::default()
    };
    let suites = verify_theory(&cfg).unwrap();
    assert_eq!(suites.len(), 4);
    assert!(suites.iter().all(|s| s.reports.is_empty() && s.violations() == 0));
}

#[test]
fn seeded_suites_reproduce() {
    let cfg = VerifyConfig {
        seed: 42,
        lemma1: 30,
        lemma2: 30,
        theorem1: 5,
        proposition1: 5,
        ..VerifyConfig::default()
    };
    let render = |suites: Vec<rail::theory::SuiteReport>| {
        suites
            .iter()
            .flat_map(|s| s.reports.iter().map(|r| r.to_string()))
            .collect::<Vec<_>>()
    };
    let a = render(verify_theory(&cfg).unwrap());
    let b = render(verify_theory(&cfg).unwrap());
    assert_eq!(a, b);
    assert!(!a.is_empty());
}

#[test]
fn bad_suite_shape_rejected() {
    let cfg = VerifyConfig {
        max_states: 20,
        ..VerifyConfig::default()
    };
    assert!(verify_theory(&cfg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lemma1_holds(seed in 0u64..10_000, n in 1usize..=6, m in 2usize..=3, horizon in 1usize..=5) {
        let mdp = random_mdp(seed, n, m, horizon);
        let r = check_lemma1(&mdp, &random_table(seed, n, m), &random_table(seed + 1, n, m)).unwrap();
        prop_assert!(r.holds(), "{}", r);
    }

    #[test]
    fn lemma2_holds(seed in 0u64..10_000, n in 1usize..=6, m in 2usize..=3, horizon in 2usize..=5) {
        let mdp = random_mdp(seed, n, m, horizon);
        let pi = random_table(seed, n, m);
        let pi_hat = random_table(seed + 7, n, m);
        let expert = random_table(seed + 13, n, m);
        for t in 1..horizon {
            let r = check_lemma2(&mdp, &pi, &pi_hat, &expert, t).unwrap();
            prop_assert!(r.holds(), "{}", r);
        }
    }

    #[test]
    fn trajectory_probabilities_sum_to_one(seed in 0u64..10_000, n in 1usize..=5, horizon in 1usize..=4) {
        let mdp = random_mdp(seed, n, 2, horizon);
        let dist = enumerate_trajectories(&mdp, &random_table(seed, n, 2), horizon).unwrap();
        prop_assert!((dist.total_probability() - 1.0).abs() < 1e-9);
    }
}
