use std::fs;
use std::process::Command;

use rail::harness::{eval_policy_file, run_experiment, ExperimentConfig};
use rail::env::EnvParams;
use rail::policy::LinearPolicy;

fn small(env: &str, learners: &[&str]) -> ExperimentConfig {
    let mut c = ExperimentConfig::desk(env, learners);
    c.budget = 10;
    c.trials = 2;
    c.eval_every = 5;
    c.eval_episodes = 3;
    if env == "cartpole" {
        c.env_params.horizon = Some(60);
    }
    c
}

#[test]
fn reruns_write_identical_csv_bytes() {
    let c = small("cartpole", &["rail-dw", "unif-qbc", "passive", "cba"]);
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let a = run_experiment(&c).unwrap().write(dir_a.path()).unwrap();
    let b = run_experiment(&c).unwrap().write(dir_b.path()).unwrap();
    assert_eq!(a.len(), b.len());
    for (pa, pb) in a.iter().zip(&b) {
        assert_eq!(pa.file_name(), pb.file_name());
        assert_eq!(fs::read(pa).unwrap(), fs::read(pb).unwrap(), "{}", pa.display());
    }
}

#[test]
fn csv_schema() {
    let c = small("chain-3", &["rail-dw"]);
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&c).unwrap().write(dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("rail-dw.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "learner,queries,mean,stderr,trial_0,trial_1");
    let queries: Vec<usize> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(queries, vec![0, 5, 10]);
    let echo = fs::read_to_string(dir.path().join("config.echo.toml")).unwrap();
    assert_eq!(ExperimentConfig::from_toml(&echo).unwrap(), c);
}

#[test]
fn curves_have_one_value_per_trial() {
    let c = small("seqlabel-L2", &["rail-dw", "passive"]);
    let r = run_experiment(&c).unwrap();
    for curve in &r.curves {
        assert!(curve.rows.windows(2).all(|w| w[0].queries < w[1].queries));
        assert!(curve.rows.iter().all(|row| row.trials.len() == 2));
        assert!(curve.rows.iter().all(|row| (0.0..=1.0).contains(&row.mean)));
    }
    assert_eq!(r.expert_mean(), 1.0);
}

#[test]
fn config_errors_come_before_any_work() {
    let mut c = small("cartpole", &["rail-dw", "dagger"]);
    assert!(matches!(run_experiment(&c), Err(rail::Error::Config(_))));
    c.learners = vec!["rail-dw".into()];
    c.budget = 0;
    assert!(run_experiment(&c).is_err());
    c.budget = 5;
    c.trials = 0;
    assert!(run_experiment(&c).is_err());
    assert!(ExperimentConfig::from_toml("env = \"cartpole\"\nlearners = [\"rail-dw\"]\nbudgett = 3\n").is_err());
}

#[test]
fn saved_policy_can_be_evaluated() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("expert.policy");
    // The expert's own gains as a two-row linear policy.
    let w = vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.5, 18.0, 3.0, 0.0];
    LinearPolicy::from_weights(2, 5, w, "cartpole-raw-bias").unwrap().save(&path).unwrap();
    let v = eval_policy_file(&path, "cartpole", &EnvParams::default(), 10, 0).unwrap();
    assert_eq!(v.mean, 500.0);
    let wrong = eval_policy_file(&path, "seqlabel-L2", &EnvParams::default(), 10, 0);
    assert!(wrong.is_err());
}

#[test]
fn cli_run_verify_and_eval() {
    let bin = env!("CARGO_BIN_EXE_rail");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, small("chain-3", &["rail-dw", "passive"]).to_toml()).unwrap();
    let out = dir.path().join("out");
    let run = Command::new(bin).arg("run").arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(out.join("rail-dw.csv").exists() && out.join("passive.csv").exists());

    let verify = Command::new(bin)
        .args(["verify-theory", "--seed", "3", "--sizes", "20,20,3,3"])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&verify.stdout);
    assert!(verify.status.success(), "{text}");
    assert!(text.contains("PASS"));

    let empty = Command::new(bin).args(["verify-theory", "--sizes", "0,0,0,0"]).output().unwrap();
    assert!(empty.status.success());
    assert!(String::from_utf8_lossy(&empty.stderr).contains("warning"));

    let policy = dir.path().join("p.txt");
    LinearPolicy::from_weights(2, 5, vec![0.0; 10], "cartpole-raw-bias").unwrap().save(&policy).unwrap();
    let eval = Command::new(bin)
        .args(["eval", "--env", "cartpole", "--episodes", "3", "--policy-file"])
        .arg(&policy)
        .output()
        .unwrap();
    assert!(eval.status.success(), "{}", String::from_utf8_lossy(&eval.stderr));
    assert!(String::from_utf8_lossy(&eval.stdout).starts_with("mean "));

    let bad = Command::new(bin).args(["run", "/nonexistent.toml"]).output().unwrap();
    assert!(!bad.status.success());
}

#[test]
fn shipped_configs_validate() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let c = ExperimentConfig::load(&path).unwrap();
            c.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
