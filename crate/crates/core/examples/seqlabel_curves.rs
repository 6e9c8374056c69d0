//! Sequence labeling as imitation: each state is a letter window plus the
//! labels already emitted, so an early mistake changes every later state.
//!
//! `cargo run --release --example seqlabel_curves -- [context] [budget] [trials]`

use rail::env::{EnvHandle, EnvParams};
use rail::harness::{run_experiment, ExperimentConfig};
use rail::mdp::Environment;

fn main() -> rail::Result<()> {
    let mut args = std::env::args().skip(1);
    let context: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(2);
    let budget = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let trials = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let env_name = format!("seqlabel-L{context}");

    if let EnvHandle::SeqLabel(env) = EnvHandle::build(&env_name, &EnvParams::default())? {
        // Words are symbol codes below the alphabet size.
        let word = [3u8, 0, 7, 7, 1, 4];
        println!(
            "{env_name}: {} features, {} labels; expert labels {word:?} as {:?}",
            env.spec().state_dim,
            env.spec().num_actions,
            env.rule().label_word(&word)
        );
    }

    let mut config = ExperimentConfig::desk(&env_name, &["rail-dw", "unif-qbc", "passive", "cba"]);
    config.budget = budget;
    config.trials = trials;
    config.eval_every = budget / 5;
    let result = run_experiment(&config)?;
    let points = config.eval_points();
    print!("{:>10}", "queries");
    for q in &points {
        print!("{q:>8}");
    }
    println!();
    for curve in &result.curves {
        print!("{:>10}", curve.learner);
        for &q in &points {
            print!("{:>8.3}", curve.at(q).map_or(f64::NAN, |r| r.mean));
        }
        println!();
    }
    Ok(())
}
