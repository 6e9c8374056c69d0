use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exact::{exact_error, exact_error_at, exact_value, prob_consistent, Tabular};
use crate::env::DiscreteMdp;
use crate::error::{Error, Result};
use crate::learners::{run_to_budget, ExpertOracle, ForwardActive, IterationRecord, LearnedPolicy, LearnerConfig, RailIdealized};
use crate::mdp::Environment;
use crate::rng::RngStream;

/// Slack for floating-point summation order; the bounds themselves are exact.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// One checked inequality `lhs ≥ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub suite: &'static str,
    pub instance: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Instance shape and any extra quantities.
    pub details: String,
}

impl BoundReport {
    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn holds(&self) -> bool {
        self.margin() >= -BOUND_TOLERANCE
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} #{} seed={} {} eps={:.6} lhs={:.9} rhs={:.9} margin={:.3e} {}",
            self.suite,
            self.instance,
            self.seed,
            self.details,
            self.epsilon,
            self.lhs,
            self.rhs,
            self.margin(),
            if self.holds() { "ok" } else { "VIOLATION" }
        )
    }
}

fn shape(mdp: &DiscreteMdp) -> String {
    format!("n={} m={} T={}", mdp.num_states(), mdp.num_actions(), mdp.horizon())
}

/// `V(π) ≥ V(π*) − εT` with `ε = 1 − P_π^T`.
pub fn check_lemma1(mdp: &DiscreteMdp, policy: &Tabular, expert: &Tabular) -> Result<BoundReport> {
    let horizon = mdp.horizon() as f64;
    let p = prob_consistent(mdp, policy, expert, mdp.horizon())?;
    let epsilon = 1.0 - p;
    let v = exact_value(mdp, policy)?;
    let v_star = exact_value(mdp, expert)?;
    Ok(BoundReport {
        suite: "lemma1",
        instance: 0,
        seed: 0,
        epsilon,
        lhs: v,
        rhs: v_star - epsilon * horizon,
        details: format!("{} P={p:.9} V*={v_star:.9}", shape(mdp)),
    })
}

/// `P_π̂^{t+1} ≥ P_π^t − Tε` with `ε` the error of `π̂` on `d_π`.
pub fn check_lemma2(mdp: &DiscreteMdp, pi: &Tabular, pi_hat: &Tabular, expert: &Tabular, t: usize) -> Result<BoundReport> {
    let horizon = mdp.horizon();
    if t < 1 || t >= horizon {
        return Err(crate::error::contract(format!("t = {t} outside 1..{horizon}")));
    }
    let epsilon = exact_error(mdp, pi_hat, expert, pi)?;
    let lhs = prob_consistent(mdp, pi_hat, expert, t + 1)?;
    let p_t = prob_consistent(mdp, pi, expert, t)?;
    Ok(BoundReport {
        suite: "lemma2",
        instance: 0,
        seed: 0,
        epsilon,
        lhs,
        rhs: p_t - horizon as f64 * epsilon,
        details: format!("{} t={t}", shape(mdp)),
    })
}

/// Idealized RAIL's final policy against `V(π*) − εT³`, `ε` the largest per-round error.
pub fn check_theorem1(
    mdp: &DiscreteMdp,
    expert: &Tabular,
    records: &[IterationRecord],
    final_policy: &LearnedPolicy,
) -> Result<BoundReport> {
    let horizon = mdp.horizon() as f64;
    let mut epsilon: f64 = 0.0;
    for r in records {
        let learned = Tabular::of(mdp, &LearnedPolicy::Stationary(r.learned.clone()));
        let reference = Tabular::of(mdp, &r.reference);
        epsilon = epsilon.max(exact_error(mdp, &learned, expert, &reference)?);
    }
    let v = exact_value(mdp, &Tabular::of(mdp, final_policy))?;
    let v_star = exact_value(mdp, expert)?;
    Ok(BoundReport {
        suite: "theorem1",
        instance: 0,
        seed: 0,
        epsilon,
        lhs: v,
        rhs: v_star - epsilon * horizon.powi(3),
        details: format!("{} rounds={}", shape(mdp), records.len()),
    })
}

/// Forward training's non-stationary policy against `V(π*) − εT²`, `ε` the
/// largest step error on that step's state distribution.
pub fn check_proposition1(
    mdp: &DiscreteMdp,
    expert: &Tabular,
    records: &[IterationRecord],
    final_policy: &LearnedPolicy,
) -> Result<BoundReport> {
    let horizon = mdp.horizon() as f64;
    let mut epsilon: f64 = 0.0;
    for r in records {
        let learned = Tabular::Stationary(
            (0..mdp.num_states()).map(|s| r.learned.act(&mdp.one_hot(s))).collect(),
        );
        let reference = Tabular::of(mdp, &r.reference);
        epsilon = epsilon.max(exact_error_at(mdp, &learned, expert, &reference, r.round + 1)?);
    }
    let v = exact_value(mdp, &Tabular::of(mdp, final_policy))?;
    let v_star = exact_value(mdp, expert)?;
    Ok(BoundReport {
        suite: "proposition1",
        instance: 0,
        seed: 0,
        epsilon,
        lhs: v,
        rhs: v_star - epsilon * horizon.powi(2),
        details: format!("{} rounds={}", shape(mdp), records.len()),
    })
}

/// Sizes and shape limits of the randomized suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    pub lemma1: usize,
    pub lemma2: usize,
    pub theorem1: usize,
    pub proposition1: usize,
    pub max_states: usize,
    pub max_actions: usize,
    pub max_horizon: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            lemma1: 1000,
            lemma2: 1000,
            theorem1: 100,
            proposition1: 100,
            max_states: 6,
            max_actions: 3,
            max_horizon: 5,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        use crate::env::discrete::{MAX_ACTIONS, MAX_HORIZON, MAX_STATES};
        if !(1..=MAX_STATES).contains(&self.max_states)
            || !(2..=MAX_ACTIONS).contains(&self.max_actions)
            || !(2..=MAX_HORIZON).contains(&self.max_horizon)
        {
            return Err(Error::Config(format!(
                "suite shapes need 1 <= states <= {MAX_STATES}, 2 <= actions <= {MAX_ACTIONS}, 2 <= horizon <= {MAX_HORIZON}"
            )));
        }
        Ok(())
    }
}

/// Results of one randomized suite.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub reports: Vec<BoundReport>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn violations(&self) -> usize {
        self.reports.iter().filter(|r| !r.holds()).count()
    }

    pub fn min_margin(&self) -> Option<f64> {
        self.reports.iter().map(BoundReport::margin).reduce(f64::min)
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} instances, {} violations, min margin {}, {:.2}s",
            self.suite,
            self.reports.len(),
            self.violations(),
            self.min_margin().map_or("n/a".into(), |m| format!("{m:.3e}")),
            self.elapsed.as_secs_f64()
        )
    }
}

const LEMMA1_TAG: u64 = 0x1E_0001;
const LEMMA2_TAG: u64 = 0x1E_0002;
const THEOREM1_TAG: u64 = 0x7E_0001;
const PROPOSITION1_TAG: u64 = 0x9_0001;

struct Instance {
    mdp: DiscreteMdp,
    expert: Tabular,
    rng: RngStream,
}

fn random_instance(cfg: &VerifyConfig, tag: u64, i: usize, min_horizon: usize) -> Result<Instance> {
    let mut rng = RngStream::new(cfg.seed, tag).derive(i as u64);
    let n = 1 + rng.index(cfg.max_states);
    let m = 2 + rng.index(cfg.max_actions - 1);
    let horizon = min_horizon + rng.index(cfg.max_horizon - min_horizon + 1);
    // Sparse and dense transition rows both appear.
    let alpha = [0.2, 1.0, 5.0][rng.index(3)];
    let mdp = DiscreteMdp::random(n, m, horizon, alpha, &mut rng)?;
    let expert = random_table(n, m, &mut rng);
    Ok(Instance { mdp, expert, rng })
}

fn random_table(n: usize, m: usize, rng: &mut RngStream) -> Tabular {
    Tabular::Stationary((0..n).map(|_| rng.index(m)).collect())
}

/// The expert's table with each entry replaced by a random action with probability `flip`.
fn perturb(expert: &Tabular, m: usize, flip: f64, rng: &mut RngStream) -> Tabular {
    match expert {
        Tabular::Stationary(t) => Tabular::Stationary(
            t.iter()
                .map(|&a| if rng.uniform(0.0, 1.0) < flip { rng.index(m) } else { a })
                .collect(),
        ),
        Tabular::NonStationary(_) => unreachable!("suite experts are stationary"),
    }
}

/// A policy that is near the expert, far from it, or unrelated, at random.
fn candidate(inst: &mut Instance) -> Tabular {
    let m = inst.mdp.num_actions();
    let flip = [0.0, 0.15, 0.5, 1.0][inst.rng.index(4)];
    perturb(&inst.expert, m, flip, &mut inst.rng)
}

fn timed(suite: &'static str, f: impl FnOnce() -> Result<Vec<BoundReport>>) -> Result<SuiteReport> {
    let start = Instant::now();
    let reports = f()?;
    Ok(SuiteReport {
        suite,
        reports,
        elapsed: start.elapsed(),
    })
}

fn stamp(mut r: BoundReport, instance: usize, seed: u64) -> BoundReport {
    r.instance = instance;
    r.seed = seed;
    r
}

pub fn lemma1_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    timed("lemma1", || {
        (0..cfg.lemma1)
            .into_par_iter()
            .map(|i| {
                let mut inst = random_instance(cfg, LEMMA1_TAG, i, 1)?;
                let policy = candidate(&mut inst);
                Ok(stamp(check_lemma1(&inst.mdp, &policy, &inst.expert)?, i, cfg.seed))
            })
            .collect()
    })
}

/// Every `t < T` of each random triple is checked.
pub fn lemma2_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    timed("lemma2", || {
        let nested = (0..cfg.lemma2)
            .into_par_iter()
            .map(|i| {
                let mut inst = random_instance(cfg, LEMMA2_TAG, i, 2)?;
                let pi = candidate(&mut inst);
                let pi_hat = candidate(&mut inst);
                (1..inst.mdp.horizon())
                    .map(|t| Ok(stamp(check_lemma2(&inst.mdp, &pi, &pi_hat, &inst.expert, t)?, i, cfg.seed)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(nested.into_iter().flatten().collect())
    })
}

fn learner_config(inst: &mut Instance) -> (LearnerConfig, usize) {
    let config = LearnerConfig {
        pool_episodes: 1 + inst.rng.index(3),
        ..LearnerConfig::default()
    };
    // Budgets range from starved to enough for every state.
    let per_round = 1 + inst.rng.index(inst.mdp.num_states() + 1);
    (config, per_round)
}

pub fn theorem1_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    timed("theorem1", || {
        (0..cfg.theorem1)
            .into_par_iter()
            .map(|i| {
                let mut inst = random_instance(cfg, THEOREM1_TAG, i, 1)?;
                let (config, per_round) = learner_config(&mut inst);
                let spec = inst.mdp.spec();
                let rounds = spec.horizon;
                let mut rail = RailIdealized::new(spec, config, rounds, per_round, None, "one-hot".into());
                let table = inst.expert.clone();
                let mut oracle = ExpertOracle::new(move |s: &usize| table.act(*s, 0));
                run_to_budget(&mut rail, &inst.mdp, &mut oracle, rounds * per_round, &mut inst.rng)?;
                let report = check_theorem1(&inst.mdp, &inst.expert, rail.records(), &LearnedPolicy::Stationary(rail.current().clone()))?;
                Ok(stamp(report, i, cfg.seed))
            })
            .collect()
    })
}

pub fn proposition1_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    timed("proposition1", || {
        (0..cfg.proposition1)
            .into_par_iter()
            .map(|i| {
                let mut inst = random_instance(cfg, PROPOSITION1_TAG, i, 1)?;
                let (config, per_round) = learner_config(&mut inst);
                let spec = inst.mdp.spec();
                let mut fwd = ForwardActive::new(spec, config, spec.horizon, per_round, "one-hot".into())?;
                let table = inst.expert.clone();
                let mut oracle = ExpertOracle::new(move |s: &usize| table.act(*s, 0));
                run_to_budget(&mut fwd, &inst.mdp, &mut oracle, spec.horizon * per_round, &mut inst.rng)?;
                let report = check_proposition1(
                    &inst.mdp,
                    &inst.expert,
                    fwd.records(),
                    &LearnedPolicy::NonStationary(fwd.nonstationary()),
                )?;
                Ok(stamp(report, i, cfg.seed))
            })
            .collect()
    })
}

/// All four suites, in order.
pub fn verify_theory(cfg: &VerifyConfig) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        lemma1_suite(cfg)?,
        lemma2_suite(cfg)?,
        theorem1_suite(cfg)?,
        proposition1_suite(cfg)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma1_equality_for_expert() {
        let mdp = DiscreteMdp::random(4, 2, 4, 1.0, &mut RngStream::new(1, 1)).unwrap();
        let expert = Tabular::Stationary(vec![0, 1, 1, 0]);
        let r = check_lemma1(&mdp, &expert, &expert).unwrap();
        assert!(r.epsilon.abs() < 1e-12);
        assert!((r.lhs - r.rhs).abs() < 1e-12);
        assert!(r.holds());
    }

    #[test]
    fn lemma1_trivial_under_constant_reward() {
        let mdp = DiscreteMdp::random(3, 3, 5, 1.0, &mut RngStream::new(2, 1)).unwrap();
        let mdp = mdp.with_rewards(vec![1.0; 3]).unwrap();
        let r = check_lemma1(&mdp, &Tabular::Stationary(vec![0, 0, 0]), &Tabular::Stationary(vec![1, 2, 0])).unwrap();
        assert!((r.lhs - 5.0).abs() < 1e-12);
        assert!(r.holds());
    }

    #[test]
    fn lemma2_with_expert_as_pi_hat() {
        let mdp = DiscreteMdp::random(4, 2, 4, 1.0, &mut RngStream::new(3, 1)).unwrap();
        let expert = Tabular::Stationary(vec![0, 1, 1, 0]);
        let pi = Tabular::Stationary(vec![1, 1, 0, 0]);
        for t in 1..4 {
            let r = check_lemma2(&mdp, &pi, &expert, &expert, t).unwrap();
            assert!((r.lhs - 1.0).abs() < 1e-12);
            assert!(r.holds());
            let r = check_lemma2(&mdp, &expert, &expert, &expert, t).unwrap();
            assert_eq!(r.epsilon, 0.0);
        }
        assert!(check_lemma2(&mdp, &pi, &expert, &expert, 4).is_err());
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
        let reports = verify_theory(&cfg).unwrap();
        assert!(reports.iter().all(|r| r.reports.is_empty() && r.violations() == 0));
    }

    #[test]
    fn small_suites_are_seeded() {
        let cfg = VerifyConfig {
            lemma1: 20,
            lemma2: 10,
            theorem1: 4,
            proposition1: 4,
            ..VerifyConfig::default()
        };
        let a = verify_theory(&cfg).unwrap();
        let b = verify_theory(&cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.reports, y.reports);
            assert_eq!(x.violations(), 0, "{}", x.summary());
        }
    }
}
