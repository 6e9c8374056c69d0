use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::env::{EnvHandle, EnvParams};
use crate::error::{Error, Result};
use crate::learners::{build_learner, ExpertOracle, StepOutcome};
use crate::mdp::{estimate_value, mean_stderr, rollout, Environment, Policy, ValueEstimate};
use crate::policy::LinearPolicy;
use crate::rng::RngStream;
use crate::with_env;

/// Stream-id offsets keeping learner, evaluation and expert randomness apart.
const LEARNER_STREAM: u64 = 0x1EA2_0000;
const EVAL_STREAM: u64 = 0xE7A1_0000;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub queries: usize,
    pub mean: f64,
    pub stderr: f64,
    pub trials: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub learner: String,
    pub rows: Vec<CurveRow>,
}

impl LearningCurve {
    pub fn at(&self, queries: usize) -> Option<&CurveRow> {
        self.rows.iter().find(|r| r.queries == queries)
    }

    /// First evaluated query count whose mean reaches `level`.
    pub fn first_reaching(&self, level: f64) -> Option<usize> {
        self.rows.iter().find(|r| r.mean >= level).map(|r| r.queries)
    }

    pub fn final_row(&self) -> &CurveRow {
        self.rows.last().expect("curves always have the zero-query row")
    }

    pub fn to_csv(&self) -> Result<String> {
        let trials = self.rows.first().map_or(0, |r| r.trials.len());
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec!["learner".to_string(), "queries".into(), "mean".into(), "stderr".into()];
        header.extend((0..trials).map(|i| format!("trial_{i}")));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![self.learner.clone(), r.queries.to_string(), r.mean.to_string(), r.stderr.to_string()];
            rec.extend(r.trials.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("CSV of ASCII fields"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub curves: Vec<LearningCurve>,
    /// The expert's performance on each trial's evaluation episodes.
    pub expert: Vec<f64>,
}

impl ExperimentResult {
    pub fn curve(&self, learner: &str) -> Option<&LearningCurve> {
        self.curves.iter().find(|c| c.learner == learner)
    }

    pub fn expert_mean(&self) -> f64 {
        mean_stderr(&self.expert).0
    }

    /// Write one CSV per learner plus the expert reference and the config echo.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for c in &self.curves {
            let path = dir.join(format!("{}.csv", c.learner));
            fs::write(&path, c.to_csv()?)?;
            written.push(path);
        }
        let expert = LearningCurve {
            learner: "expert".into(),
            rows: vec![CurveRow {
                queries: 0,
                mean: self.expert_mean(),
                stderr: mean_stderr(&self.expert).1,
                trials: self.expert.clone(),
            }],
        };
        let path = dir.join("expert.csv");
        fs::write(&path, expert.to_csv()?)?;
        written.push(path);
        let path = dir.join("config.echo.toml");
        fs::write(&path, self.config.to_toml())?;
        written.push(path);
        Ok(written)
    }
}

/// Mean performance of `policy` over `episodes` rollouts.
pub fn evaluate<E, P>(env: &E, policy: &P, episodes: usize, rng: &mut RngStream) -> Result<f64>
where
    E: Environment + ?Sized,
    P: Policy<E::State> + ?Sized,
{
    let horizon = env.spec().horizon;
    let mut scores = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut r = rng.fork();
        let traj = rollout(env, policy, horizon, &mut r)?;
        scores.push(env.performance(traj.total_reward().unwrap_or(0.0)));
    }
    Ok(mean_stderr(&scores).0)
}

/// Evaluation stream for a trial; identical for every learner and evaluation point.
pub fn eval_stream(seed: u64, trial: usize) -> RngStream {
    RngStream::new(seed, EVAL_STREAM + trial as u64)
}

/// Learner stream for a trial.
pub fn learner_stream(seed: u64, trial: usize) -> RngStream {
    RngStream::new(seed, LEARNER_STREAM + trial as u64)
}

/// One learner, one trial: performance at each evaluation point.
pub fn run_trial<E, X>(env: &E, expert: &X, name: &str, config: &ExperimentConfig, feature_map: &str, trial: usize) -> Result<Vec<f64>>
where
    E: Environment + 'static,
    X: Fn(&E::State) -> usize + Sync,
{
    let mut learner = build_learner(name, env, &config.learner, config.budget, feature_map)?;
    let mut oracle = ExpertOracle::new(|s: &E::State| expert(s));
    let mut rng = learner_stream(config.seed, trial);
    let mut values = Vec::new();
    let mut stopped = false;
    for target in config.eval_points() {
        while !stopped && learner.queries_used() < target {
            stopped = learner.step(env, &mut oracle, &mut rng)? == StepOutcome::Stopped;
        }
        let policy = learner.policy();
        values.push(evaluate(env, &policy.on(env), config.eval_episodes, &mut eval_stream(config.seed, trial))?);
    }
    Ok(values)
}

fn run_generic<E, X>(env: &E, expert: &X, config: &ExperimentConfig, feature_map: &str) -> Result<ExperimentResult>
where
    E: Environment + 'static,
    X: Fn(&E::State) -> usize + Sync,
{
    let jobs: Vec<(usize, usize)> = (0..config.learners.len())
        .flat_map(|l| (0..config.trials).map(move |t| (l, t)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(l, t)| run_trial(env, expert, &config.learners[l], config, feature_map, t))
        .collect::<Result<Vec<_>>>()?;
    let points = config.eval_points();
    let curves = config
        .learners
        .iter()
        .enumerate()
        .map(|(l, name)| {
            let per_trial = &results[l * config.trials..(l + 1) * config.trials];
            let rows = points
                .iter()
                .enumerate()
                .map(|(i, &q)| {
                    let trials: Vec<f64> = per_trial.iter().map(|v| v[i]).collect();
                    let (mean, stderr) = mean_stderr(&trials);
                    CurveRow {
                        queries: q,
                        mean,
                        stderr,
                        trials,
                    }
                })
                .collect();
            LearningCurve {
                learner: name.clone(),
                rows,
            }
        })
        .collect();
    let expert_values = (0..config.trials)
        .map(|t| evaluate(env, expert, config.eval_episodes, &mut eval_stream(config.seed, t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        config: config.clone(),
        curves,
        expert: expert_values,
    })
}

/// Run every learner for every trial. Deterministic given the config.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let handle = EnvHandle::build(&config.env, &config.env_params)?;
    let fmap = handle.feature_map();
    with_env!(&handle, |env, expert| run_generic(env, &expert, config, &fmap))
}

/// Load a saved linear policy and score it on a registered environment.
/// Uses the evaluation stream of trial 0, so the result is seeded like a curve point.
pub fn eval_policy_file(
    path: impl AsRef<Path>,
    env_name: &str,
    params: &EnvParams,
    episodes: usize,
    seed: u64,
) -> Result<ValueEstimate> {
    if episodes < 1 {
        return Err(Error::Config("episodes must be at least 1".into()));
    }
    let policy = LinearPolicy::load(path)?;
    let handle = EnvHandle::build(env_name, params)?;
    let expected = handle.feature_map();
    if policy.feature_map() != expected {
        return Err(Error::Config(format!(
            "policy was trained on feature map {:?}, {env_name} uses {expected:?}",
            policy.feature_map()
        )));
    }
    with_env!(&handle, |env, _expert| {
        if policy.feature_dim() != env.spec().state_dim || policy.num_actions() != env.spec().num_actions {
            return Err(Error::Config("policy shape does not match the environment".into()));
        }
        let mut rng = eval_stream(seed, 0);
        estimate_value(env, &policy.on(env), episodes, &mut rng)
    })
}
