//! Active imitation learning by reduction to i.i.d. active learning.
//!
//! The learner never sees rewards. It improves a linear policy by asking an
//! expert which action to take in chosen states. RAIL-DW picks each query from
//! states its current bagged committee would visit, weighting committee
//! disagreement by how crowded that region of the pool is.

pub mod env;
pub mod error;
pub mod harness;
pub mod learners;
pub mod mdp;
pub mod policy;
pub mod rng;
pub mod select;
pub mod theory;

pub use error::{Error, Result};
pub use rng::RngStream;
