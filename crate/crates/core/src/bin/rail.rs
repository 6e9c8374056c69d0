use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use rail::env::EnvParams;
use rail::harness::{eval_policy_file, run_experiment, start_session, ExperimentConfig, SessionConfig, SessionStatus};
use rail::theory::{verify_theory, VerifyConfig};

#[derive(Parser)]
#[command(name = "rail", version, about = "Active imitation learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write one CSV per learner.
    Run {
        config: PathBuf,
        /// Output directory; defaults to results/<config name>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the performance bounds exactly on random small MDPs.
    VerifyTheory {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instance counts for lemma1,lemma2,theorem1,proposition1.
        #[arg(long, value_delimiter = ',', default_values_t = [1000, 1000, 100, 100])]
        sizes: Vec<usize>,
        /// Print one line per instance, not just the summaries.
        #[arg(long)]
        verbose: bool,
    },
    /// Serve a live expert session over HTTP.
    Serve {
        #[arg(long)]
        env: String,
        #[arg(long)]
        learner: String,
        #[arg(long)]
        budget: usize,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Close the session after this many seconds without a label.
        #[arg(long)]
        idle_timeout: Option<u64>,
        /// Horizon override.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Score a saved policy.
    Eval {
        #[arg(long)]
        policy_file: PathBuf,
        #[arg(long)]
        env: String,
        #[arg(long, default_value_t = 30)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        horizon: Option<usize>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> rail::Result<ExitCode> {
    match command {
        Command::Run { config, out } => {
            let config = ExperimentConfig::load(&config)?;
            let out = out.unwrap_or_else(|| PathBuf::from("results").join(&config.name));
            let result = run_experiment(&config)?;
            println!("expert mean {:.3}", result.expert_mean());
            for curve in &result.curves {
                let last = curve.final_row();
                println!(
                    "{:<15} final {:>9.3} ± {:<7.3} at {} queries",
                    curve.learner, last.mean, last.stderr, last.queries
                );
            }
            for path in result.write(&out)? {
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyTheory { seed, sizes, verbose } => {
            if sizes.len() != 4 {
                return Err(rail::Error::Config(format!(
                    "--sizes takes four counts (lemma1,lemma2,theorem1,proposition1), got {}",
                    sizes.len()
                )));
            }
            let cfg = VerifyConfig {
                seed,
                lemma1: sizes[0],
                lemma2: sizes[1],
                theorem1: sizes[2],
                proposition1: sizes[3],
                ..VerifyConfig::default()
            };
            let suites = verify_theory(&cfg)?;
            let mut violations = 0;
            for suite in &suites {
                if suite.reports.is_empty() {
                    eprintln!("warning: {} has no instances", suite.suite);
                }
                for r in &suite.reports {
                    if verbose || !r.holds() {
                        println!("{r}");
                    }
                }
                println!("{}", suite.summary());
                violations += suite.violations();
            }
            if violations > 0 {
                println!("FAIL: {violations} violations");
                Ok(ExitCode::FAILURE)
            } else {
                println!("PASS");
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Serve {
            env,
            learner,
            budget,
            port,
            seed,
            idle_timeout,
            horizon,
        } => {
            let mut cfg = SessionConfig::new(&env, &learner, budget);
            cfg.port = port;
            cfg.seed = seed;
            cfg.idle_timeout = idle_timeout.map(Duration::from_secs);
            cfg.env_params.horizon = horizon;
            let mut session = start_session(cfg)?;
            println!("serving {learner} on {env} at http://{} (nonce {})", session.addr(), session.nonce());
            let data = session.wait_learner();
            let status = session.status();
            println!("session {status:?}: {} labels", session.history().len());
            // Keep answering status polls briefly so a client sees the final state.
            std::thread::sleep(Duration::from_secs(2));
            session.shutdown()?;
            match (data, status) {
                (Ok(_), SessionStatus::Done | SessionStatus::Closed) => Ok(ExitCode::SUCCESS),
                (Err(rail::Error::SessionClosed), _) => Ok(ExitCode::SUCCESS),
                (Err(e), _) => Err(e),
                _ => Ok(ExitCode::FAILURE),
            }
        }
        Command::Eval {
            policy_file,
            env,
            episodes,
            seed,
            horizon,
        } => {
            let params = EnvParams {
                horizon,
                ..EnvParams::default()
            };
            let v = eval_policy_file(&policy_file, &env, &params, episodes, seed)?;
            println!("mean {:.4} stderr {:.4} over {} episodes", v.mean, v.stderr, episodes);
            Ok(ExitCode::SUCCESS)
        }
    }
}
