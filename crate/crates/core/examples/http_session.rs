//! A live labeling session driven by a scripted expert over HTTP.
//!
//! Starts the JSON service on a free port, answers every query with the
//! cart-pole controller, and prints the learning curve the session recorded.
//! Pass `--serve-only` to leave the session open for a browser or curl client.
//!
//! `cargo run --release --example http_session -- [budget] [--serve-only]`

use std::time::Duration;

use rail::env::cartpole::cartpole_expert;
use rail::env::CartPoleState;
use rail::harness::{start_session, SessionConfig};
use serde_json::{json, Value};

fn main() -> rail::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let budget = args.iter().find_map(|a| a.parse().ok()).unwrap_or(20);
    let serve_only = args.iter().any(|a| a == "--serve-only");

    let mut config = SessionConfig::new("cartpole", "rail-dw", budget);
    config.env_params.horizon = Some(200);
    config.eval_episodes = 10;
    let mut session = start_session(config)?;
    let base = format!("http://{}", session.addr());
    println!("session at {base}, nonce {}", session.nonce());
    if serve_only {
        println!("try: curl {base}/query");
        let _ = session.wait_learner();
        return Ok(());
    }

    let client = reqwest::blocking::Client::new();
    let get = |path: &str| -> Value { client.get(format!("{base}{path}")).send().unwrap().json().unwrap() };
    loop {
        let q = get("/query");
        if q["status"] == "done" {
            break;
        }
        let Some(id) = q["query_id"].as_u64() else {
            std::thread::sleep(Duration::from_millis(20));
            continue;
        };
        let v: Vec<f64> = serde_json::from_value(q["state_values"].clone()).unwrap();
        let action = cartpole_expert(&CartPoleState::new(v[0], v[1], v[2], v[3]));
        let reply: Value = client
            .post(format!("{base}/label"))
            .json(&json!({ "query_id": id, "action": action }))
            .send()
            .unwrap()
            .json()
            .unwrap();
        println!(
            "query {id}: theta {:+.3} -> {} (used {})",
            v[2],
            q["action_labels"][action].as_str().unwrap_or("?"),
            reply["queries_used"]
        );
    }
    session.wait_learner()?;
    for row in get("/curve")["rows"].as_array().unwrap() {
        println!("after {:>3} labels: {:.1}", row["queries"], row["value"].as_f64().unwrap());
    }
    session.shutdown()
}
