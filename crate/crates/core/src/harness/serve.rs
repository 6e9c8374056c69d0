//! Live expert session over HTTP/JSON.
//!
//! The learner runs on its own thread with an oracle that publishes each
//! query and blocks until a label arrives. Exactly one query is outstanding
//! at a time; label posts are serialized through one lock.

use std::net::{SocketAddr, TcpListener};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::experiment::{eval_stream, evaluate, learner_stream};
use crate::env::{EnvHandle, EnvParams};
use crate::error::{Error, Result};
use crate::learners::{build_learner, ExpertOracle, LearnerConfig, StepOutcome};
use crate::mdp::Environment;
use crate::policy::Dataset;
use crate::rng::RngStream;
use crate::with_env;

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub env: String,
    pub env_params: EnvParams,
    pub learner: String,
    pub learner_config: LearnerConfig,
    pub budget: usize,
    pub seed: u64,
    pub eval_every: usize,
    pub eval_episodes: usize,
    /// Close the session if no label arrives for this long.
    pub idle_timeout: Option<Duration>,
    /// 0 picks a free port.
    pub port: u16,
}

impl SessionConfig {
    pub fn new(env: &str, learner: &str, budget: usize) -> Self {
        Self {
            env: env.into(),
            env_params: EnvParams::default(),
            learner: learner.into(),
            learner_config: LearnerConfig::default(),
            budget,
            seed: 0,
            eval_every: 5,
            eval_episodes: 30,
            idle_timeout: None,
            port: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionStatus {
    /// The learner is computing its next query.
    Waiting,
    /// A query is outstanding.
    Querying,
    Done,
    /// Stopped by the client or the idle timeout before the budget was spent.
    Closed,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryView {
    pub query_id: u64,
    pub state_values: Vec<f64>,
    pub render: Value,
    pub action_labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledQuery {
    pub query_id: u64,
    pub state_values: Vec<f64>,
    pub action: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCurveRow {
    pub queries: usize,
    pub value: f64,
}

#[derive(Debug, Deserialize)]
pub struct LabelRequest {
    pub query_id: u64,
    pub action: usize,
}

enum Message {
    Label(u64, usize),
    Stop,
}

struct Shared {
    nonce: String,
    env: String,
    learner: String,
    budget: usize,
    num_actions: usize,
    status: SessionStatus,
    error: Option<String>,
    queries_used: usize,
    next_id: u64,
    pending: Option<QueryView>,
    history: Vec<LabeledQuery>,
    curve: Vec<SessionCurveRow>,
}

#[derive(Clone)]
struct AppState {
    shared: Arc<Mutex<Shared>>,
    labels: mpsc::Sender<Message>,
}

/// A running session: HTTP server plus learner thread.
pub struct SessionHandle {
    addr: SocketAddr,
    shared: Arc<Mutex<Shared>>,
    learner: Option<JoinHandle<Result<Dataset>>>,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    server: Option<JoinHandle<std::io::Result<()>>>,
}

impl SessionHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn nonce(&self) -> String {
        self.shared.lock().expect("session lock").nonce.clone()
    }

    pub fn status(&self) -> SessionStatus {
        self.shared.lock().expect("session lock").status
    }

    pub fn history(&self) -> Vec<LabeledQuery> {
        self.shared.lock().expect("session lock").history.clone()
    }

    /// Block until the learner finishes; returns its labeled dataset.
    pub fn wait_learner(&mut self) -> Result<Dataset> {
        match self.learner.take() {
            Some(h) => h.join().map_err(|_| Error::Contract("learner thread panicked".into()))?,
            None => Err(Error::Contract("learner already joined".into())),
        }
    }

    /// Stop serving HTTP. The learner thread is left to finish on its own.
    pub fn shutdown(mut self) -> Result<()> {
        self.stop_server()
    }

    fn stop_server(&mut self) -> Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(h) = self.server.take() {
            h.join().map_err(|_| Error::Contract("server thread panicked".into()))??;
        }
        Ok(())
    }
}

impl Drop for SessionHandle {
    fn drop(&mut self) {
        let _ = self.stop_server();
    }
}

fn make_nonce(seed: u64) -> String {
    let t = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos() as u64);
    let mut r = RngStream::new(seed ^ t, u64::from(std::process::id()));
    format!("{:016x}", rand::RngCore::next_u64(&mut r))
}

/// Validate the configuration, bind the port, and start the session.
pub fn start_session(config: SessionConfig) -> Result<SessionHandle> {
    if config.budget < 1 {
        return Err(Error::Config("budget must be at least 1".into()));
    }
    if config.eval_every < 1 || config.eval_episodes < 1 {
        return Err(Error::Config("eval_every and eval_episodes must be positive".into()));
    }
    let handle = EnvHandle::build(&config.env, &config.env_params)?;
    let feature_map = handle.feature_map();
    let num_actions = with_env!(&handle, |env, _expert| {
        // Fail fast on unknown learners or unsupported pairings.
        build_learner(&config.learner, env, &config.learner_config, config.budget, &feature_map)?;
        Ok::<_, Error>(env.spec().num_actions)
    })?;
    if with_env!(&handle, |env, _expert| env.render(&env.initial_state(&mut RngStream::new(0, 0)))).is_null() {
        return Err(Error::Unsupported(format!("{} has no rendering metadata", config.env)));
    }

    let shared = Arc::new(Mutex::new(Shared {
        nonce: make_nonce(config.seed),
        env: config.env.clone(),
        learner: config.learner.clone(),
        budget: config.budget,
        num_actions,
        status: SessionStatus::Waiting,
        error: None,
        queries_used: 0,
        next_id: 1,
        pending: None,
        history: Vec::new(),
        curve: Vec::new(),
    }));
    let (tx, rx) = mpsc::channel();

    let listener = TcpListener::bind(("127.0.0.1", config.port))?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    let app = router(AppState {
        shared: shared.clone(),
        labels: tx,
    });
    let (shutdown_tx, shutdown_rx) = tokio::sync::oneshot::channel::<()>();
    let server = std::thread::spawn(move || -> std::io::Result<()> {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(1)
            .enable_all()
            .build()?;
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener)?;
            axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = shutdown_rx.await;
                })
                .await
        })
    });

    let learner_shared = shared.clone();
    let learner = std::thread::spawn(move || {
        let result = with_env!(&handle, |env, _expert| run_session_learner(
            env,
            &config,
            &feature_map,
            &learner_shared,
            rx
        ));
        let mut s = learner_shared.lock().expect("session lock");
        s.pending = None;
        match &result {
            Ok(_) if s.queries_used >= s.budget || s.status == SessionStatus::Waiting => s.status = SessionStatus::Done,
            Ok(_) => {}
            Err(Error::SessionClosed) => s.status = SessionStatus::Closed,
            Err(e) => {
                s.status = SessionStatus::Failed;
                s.error = Some(e.to_string());
            }
        }
        result
    });

    Ok(SessionHandle {
        addr,
        shared,
        learner: Some(learner),
        shutdown: Some(shutdown_tx),
        server: Some(server),
    })
}

fn run_session_learner<E: Environment + 'static>(
    env: &E,
    config: &SessionConfig,
    feature_map: &str,
    shared: &Arc<Mutex<Shared>>,
    rx: mpsc::Receiver<Message>,
) -> Result<Dataset> {
    let mut learner = build_learner(&config.learner, env, &config.learner_config, config.budget, feature_map)?;
    let labels = env.action_labels();
    let idle = config.idle_timeout;
    let oracle_shared = shared.clone();
    let mut oracle = ExpertOracle::fallible(move |s: &E::State| {
        let id = {
            let mut g = oracle_shared.lock().expect("session lock");
            let id = g.next_id;
            g.next_id += 1;
            g.pending = Some(QueryView {
                query_id: id,
                state_values: env.state_values(s),
                render: env.render(s),
                action_labels: labels.clone(),
            });
            g.status = SessionStatus::Querying;
            id
        };
        loop {
            let msg = match idle {
                Some(d) => rx.recv_timeout(d).map_err(|_| Error::SessionClosed)?,
                None => rx.recv().map_err(|_| Error::SessionClosed)?,
            };
            match msg {
                Message::Label(qid, action) if qid == id => {
                    oracle_shared.lock().expect("session lock").status = SessionStatus::Waiting;
                    return Ok(action);
                }
                Message::Label(..) => continue,
                Message::Stop => return Err(Error::SessionClosed),
            }
        }
    });
    let mut rng = learner_stream(config.seed, 0);
    let record = |learner: &dyn crate::learners::Learner<E>| -> Result<()> {
        let policy = learner.policy();
        let value = evaluate(env, &policy.on(env), config.eval_episodes, &mut eval_stream(config.seed, 0))?;
        shared.lock().expect("session lock").curve.push(SessionCurveRow {
            queries: learner.queries_used(),
            value,
        });
        Ok(())
    };
    record(learner.as_ref())?;
    while learner.queries_used() < config.budget {
        let outcome = learner.step(env, &mut oracle, &mut rng)?;
        let q = learner.queries_used();
        if outcome == StepOutcome::Stopped || q % config.eval_every == 0 || q == config.budget {
            record(learner.as_ref())?;
        }
        if outcome == StepOutcome::Stopped {
            break;
        }
    }
    Ok(learner.queried().clone())
}

fn router(state: AppState) -> Router {
    Router::new()
        .route("/session", get(get_session))
        .route("/query", get(get_query))
        .route("/label", post(post_label))
        .route("/curve", get(get_curve))
        .route("/history", get(get_history))
        .route("/stop", post(post_stop))
        .with_state(state)
}

async fn get_session(State(app): State<AppState>) -> Json<Value> {
    let s = app.shared.lock().expect("session lock");
    Json(json!({
        "nonce": s.nonce,
        "env": s.env,
        "learner": s.learner,
        "budget": s.budget,
        "queries_used": s.queries_used,
        "status": s.status,
        "error": s.error,
    }))
}

async fn get_query(State(app): State<AppState>) -> Json<Value> {
    let s = app.shared.lock().expect("session lock");
    Json(match &s.pending {
        Some(q) => json!({
            "nonce": s.nonce,
            "query_id": q.query_id,
            "state_values": q.state_values,
            "render": q.render,
            "action_labels": q.action_labels,
        }),
        None => {
            let status = match s.status {
                SessionStatus::Done | SessionStatus::Closed | SessionStatus::Failed => "done",
                _ => "waiting",
            };
            json!({ "nonce": s.nonce, "status": status })
        }
    })
}

async fn post_label(State(app): State<AppState>, Json(req): Json<LabelRequest>) -> Response {
    let mut s = app.shared.lock().expect("session lock");
    let reject = |code: StatusCode, s: &Shared, msg: &str| {
        (
            code,
            Json(json!({
                "nonce": s.nonce,
                "accepted": false,
                "queries_used": s.queries_used,
                "error": msg,
            })),
        )
            .into_response()
    };
    let Some(pending) = s.pending.as_ref() else {
        return reject(StatusCode::CONFLICT, &s, "no query is outstanding");
    };
    if pending.query_id != req.query_id {
        return reject(StatusCode::CONFLICT, &s, "stale query id");
    }
    if req.action >= s.num_actions {
        let msg = format!("action {} out of range for {} actions", req.action, s.num_actions);
        return reject(StatusCode::UNPROCESSABLE_ENTITY, &s, &msg);
    }
    let pending = s.pending.take().expect("checked above");
    if app.labels.send(Message::Label(pending.query_id, req.action)).is_err() {
        s.pending = Some(pending);
        return reject(StatusCode::GONE, &s, "learner is no longer running");
    }
    s.queries_used += 1;
    s.status = SessionStatus::Waiting;
    s.history.push(LabeledQuery {
        query_id: pending.query_id,
        state_values: pending.state_values,
        action: req.action,
    });
    Json(json!({ "nonce": s.nonce, "accepted": true, "queries_used": s.queries_used })).into_response()
}

async fn get_curve(State(app): State<AppState>) -> Json<Value> {
    let s = app.shared.lock().expect("session lock");
    Json(json!({ "nonce": s.nonce, "rows": s.curve }))
}

async fn get_history(State(app): State<AppState>) -> Json<Value> {
    let s = app.shared.lock().expect("session lock");
    Json(json!({ "nonce": s.nonce, "labels": s.history }))
}

async fn post_stop(State(app): State<AppState>) -> Json<Value> {
    let s = app.shared.lock().expect("session lock");
    let _ = app.labels.send(Message::Stop);
    Json(json!({ "nonce": s.nonce, "stopping": true }))
}
