//! Exact values on small MDPs and the randomized bound checks.
//!
//! `cargo run --release --example theory_check -- [seed]`

use rail::env::DiscreteMdp;
use rail::theory::{exact_error, exact_value, prob_consistent, state_marginals, verify_theory, Tabular, VerifyConfig};
use rail::RngStream;

fn main() -> rail::Result<()> {
    let seed = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0);

    // Every chain state pays 1, so both policies score the horizon; only
    // the state marginals tell them apart.
    let chain = DiscreteMdp::chain(4)?;
    let advance = Tabular::Stationary(vec![1; 4]);
    let stay = Tabular::Stationary(vec![0; 4]);
    println!("chain-4: V(advance) = {}, V(stay) = {}", exact_value(&chain, &advance)?, exact_value(&chain, &stay)?);
    for (t, d) in state_marginals(&chain, &advance)?.iter().enumerate() {
        println!("  d_{} under advance: {d:?}", t + 1);
    }

    // A random MDP and a policy that disagrees with the expert in one state.
    let mut rng = RngStream::new(seed, 7);
    let mdp = DiscreteMdp::random(5, 3, 4, 1.0, &mut rng)?;
    let expert = Tabular::Stationary((0..5).map(|_| rng.index(3)).collect());
    let mut table = match &expert {
        Tabular::Stationary(t) => t.clone(),
        Tabular::NonStationary(_) => unreachable!(),
    };
    table[0] = (table[0] + 1) % 3;
    let learner = Tabular::Stationary(table);
    println!(
        "random MDP: V(expert) = {:.6}, V(learner) = {:.6}",
        exact_value(&mdp, &expert)?,
        exact_value(&mdp, &learner)?
    );
    for t in 1..=mdp.horizon() {
        println!("  P(consistent with expert through step {t}) = {:.6}", prob_consistent(&mdp, &learner, &expert, t)?);
    }
    println!("  error on the learner's own distribution = {:.6}", exact_error(&mdp, &learner, &expert, &learner)?);

    let cfg = VerifyConfig {
        seed,
        lemma1: 200,
        lemma2: 200,
        theorem1: 20,
        proposition1: 20,
        ..VerifyConfig::default()
    };
    for suite in verify_theory(&cfg)? {
        println!("{}", suite.summary());
    }
    Ok(())
}
