//! Fit a linear policy to expert labels on cart-pole, save it, reload it, score it.
//!
//! `cargo run --release --example policy_roundtrip -- [labels]`

use rail::env::cartpole::cartpole_expert;
use rail::env::{CartPole, EnvParams};
use rail::harness::{eval_policy_file, eval_stream};
use rail::mdp::{estimate_value, sample_d_pi, Environment};
use rail::policy::{train_logistic_with_report, Dataset, LinearPolicy, TrainConfig};
use rail::RngStream;

fn main() -> rail::Result<()> {
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(200);
    let env = CartPole::with_horizon(500);
    let mut rng = RngStream::new(1, 0);

    // Label states drawn from the expert's own state distribution. This is
    // the passive setting: the fit is good on-trajectory but the learner
    // soon leaves the states it was trained on.
    let spec = env.spec();
    let mut data = Dataset::new(spec.num_actions, spec.state_dim);
    for s in sample_d_pi(&env, &cartpole_expert, n, &mut rng)? {
        data.push(env.featurize(&s), cartpole_expert(&s))?;
    }
    let (policy, report) = train_logistic_with_report(&data, &TrainConfig::default(), "cartpole-raw-bias")?;
    println!(
        "fit {} labels: converged {} after {} iterations, objective {:.5}",
        data.len(),
        report.converged,
        report.iterations,
        report.objective_trace.last().copied().unwrap_or(f64::NAN)
    );
    let agree = data.iter().filter(|(x, y)| policy.act(x.values()) == *y).count();
    println!("training agreement {agree}/{}", data.len());

    let dir = std::env::temp_dir().join("rail-policy-roundtrip");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("cartpole.policy");
    policy.save(&path)?;
    assert_eq!(LinearPolicy::load(&path)?, policy);
    println!("saved to {}:\n{}", path.display(), policy.to_text());

    let direct = estimate_value(&env, &policy.on(&env), 30, &mut eval_stream(2, 0))?;
    let from_file = eval_policy_file(&path, "cartpole", &EnvParams::default(), 30, 2)?;
    let expert = estimate_value(&env, &cartpole_expert, 30, &mut eval_stream(2, 0))?;
    println!("expert          {:.1} ± {:.1}", expert.mean, expert.stderr);
    println!("learned         {:.1} ± {:.1}", direct.mean, direct.stderr);
    println!("learned (file)  {:.1} ± {:.1}", from_file.mean, from_file.stderr);
    Ok(())
}
