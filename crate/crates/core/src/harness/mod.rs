//! Experiment orchestration: configs, learning curves, CSV output, the bound
//! verification entry point, and the HTTP expert session.

mod config;
mod experiment;
mod serve;

pub use config::ExperimentConfig;
pub use experiment::{
    eval_policy_file, eval_stream, evaluate, learner_stream, run_experiment, run_trial, CurveRow, ExperimentResult, LearningCurve,
};
pub use serve::{
    start_session, LabelRequest, LabeledQuery, QueryView, SessionConfig, SessionCurveRow, SessionHandle, SessionStatus,
};
