//! Cart-pole learning curves at desk scale.
//!
//! `cargo run --release --example cartpole_desk -- [trials] [learner...]`

use rail::env::FailureMode;
use rail::harness::{run_experiment, ExperimentConfig};

fn main() -> rail::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let trials = args.first().and_then(|a| a.parse().ok()).unwrap_or(10);
    let mut learners: Vec<&str> = args.iter().skip(1).map(String::as_str).collect();
    if learners.is_empty() {
        learners = vec!["rail-dw", "rail-qbc", "rail-rand", "unif-qbc", "unif-rand", "passive", "cba"];
    }
    let mut config = ExperimentConfig::desk("cartpole", &learners);
    config.trials = trials;
    if std::env::var("FROZEN").is_ok() {
        config.env_params.failure_mode = FailureMode::Frozen;
    }
    let result = run_experiment(&config)?;
    println!("expert {:.1}", result.expert_mean());
    let points = [0, 10, 20, 30, 50, 75, 100, 125, 150];
    print!("{:>10}", "queries");
    for q in points {
        print!("{q:>8}");
    }
    println!();
    for curve in &result.curves {
        print!("{:>10}", curve.learner);
        for q in points {
            print!("{:>8.1}", curve.at(q).map_or(f64::NAN, |r| r.mean));
        }
        println!();
    }
    Ok(())
}
