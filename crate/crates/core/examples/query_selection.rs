//! How density weighting changes which state gets queried.
//!
//! Fits a bagged committee to a handful of cart-pole labels, pools the states
//! its members visit, and compares the picks of plain and density-weighted
//! query-by-committee.
//!
//! `cargo run --release --example query_selection -- [labels] [seed]`

use rail::env::cartpole::cartpole_expert;
use rail::env::CartPole;
use rail::mdp::{rollout, sample_d_pi, Environment, StateVec};
use rail::policy::{bootstrap_committee, Dataset, TrainConfig};
use rail::select::{estimate_density, pool_entropies, BinningConfig, Selector};
use rail::RngStream;

fn main() -> rail::Result<()> {
    let mut args = std::env::args().skip(1);
    let labels = args.next().and_then(|a| a.parse().ok()).unwrap_or(8);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let env = CartPole::with_horizon(200);
    let mut rng = RngStream::new(seed, 0);

    let spec = env.spec();
    let mut data = Dataset::new(spec.num_actions, spec.state_dim);
    for s in sample_d_pi(&env, &cartpole_expert, labels, &mut rng)? {
        data.push(env.featurize(&s), cartpole_expert(&s))?;
    }
    let committee = bootstrap_committee(&data, 5, &TrainConfig::default(), "cartpole-raw-bias", &mut rng)?;

    let mut pool: Vec<StateVec> = Vec::new();
    for member in committee.members() {
        let traj = rollout(&env, &member.on(&env), spec.horizon, &mut rng.fork())?;
        pool.extend(traj.states().map(|s| env.featurize(s)));
    }
    let binning = BinningConfig::default();
    let entropy = pool_entropies(&pool, &committee);
    let density = estimate_density(&pool, &binning)?;
    let disputed = entropy.iter().filter(|&&h| h > 0.0).count();
    println!("{} labels, pool of {} states, {disputed} with any disagreement", data.len(), pool.len());

    let show = |name: &str, i: usize| {
        let v = pool[i].values();
        println!(
            "{name:>7} picks #{i:<4} x {:+.3} xdot {:+.3} theta {:+.3} thetadot {:+.3}  entropy {:.3} density {:.4} expert {}",
            v[0],
            v[1],
            v[2],
            v[3],
            entropy[i],
            density[i],
            ["left", "right"][cartpole_expert(&rail::env::CartPoleState::new(v[0], v[1], v[2], v[3]))]
        );
    };
    for (name, selector) in [("qbc", Selector::Qbc), ("dw-qbc", Selector::DwQbc), ("random", Selector::Random)] {
        let i = selector.select(&pool, &committee, &binning, &mut rng)?;
        show(name, i);
    }
    Ok(())
}
