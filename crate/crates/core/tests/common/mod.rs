//! Scripted expert client for the HTTP session.

#![allow(dead_code)]

use std::time::{Duration, Instant};

use reqwest::blocking::Client;
use serde_json::{json, Value};

use rail::env::cartpole::cartpole_expert;
use rail::env::CartPoleState;

pub struct Scripted {
    pub client: Client,
    pub base: String,
}

impl Scripted {
    pub fn new(addr: std::net::SocketAddr) -> Self {
        Self {
            client: Client::new(),
            base: format!("http://{addr}"),
        }
    }

    pub fn get(&self, path: &str) -> Value {
        self.client.get(format!("{}{path}", self.base)).send().unwrap().json().unwrap()
    }

    /// Returns the status code and body.
    pub fn label(&self, query_id: u64, action: usize) -> (u16, Value) {
        let r = self
            .client
            .post(format!("{}/label", self.base))
            .json(&json!({ "query_id": query_id, "action": action }))
            .send()
            .unwrap();
        (r.status().as_u16(), r.json().unwrap())
    }

    /// Wait for the next query; `None` once the session is done.
    pub fn next_query(&self) -> Option<Value> {
        let deadline = Instant::now() + Duration::from_secs(600);
        loop {
            let q = self.get("/query");
            if q.get("query_id").is_some() {
                return Some(q);
            }
            if q["status"] == "done" {
                return None;
            }
            assert!(Instant::now() < deadline, "session stalled");
            std::thread::sleep(Duration::from_millis(2));
        }
    }

    /// Answer every query with `expert` until the session finishes. Returns labels given.
    pub fn drive(&self, expert: impl Fn(&[f64]) -> usize) -> usize {
        let mut given = 0;
        while let Some(q) = self.next_query() {
            let values: Vec<f64> = q["state_values"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_f64().unwrap())
                .collect();
            let (code, body) = self.label(q["query_id"].as_u64().unwrap(), expert(&values));
            assert_eq!(code, 200, "{body}");
            assert_eq!(body["accepted"], true);
            given += 1;
        }
        given
    }
}

pub fn cartpole_expert_from_values(v: &[f64]) -> usize {
    cartpole_expert(&CartPoleState::new(v[0], v[1], v[2], v[3]))
}
