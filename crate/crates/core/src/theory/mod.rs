//! Exact computation on small discrete MDPs by exhaustive trajectory
//! enumeration, and randomized checks of the regret bounds that tie
//! per-round classification error to policy value.

mod bounds;
mod exact;

pub use bounds::{
    check_lemma1, check_lemma2, check_proposition1, check_theorem1, lemma1_suite, lemma2_suite,
    proposition1_suite, theorem1_suite, verify_theory, BoundReport, SuiteReport, VerifyConfig, BOUND_TOLERANCE,
};
pub use exact::{
    enumerate_trajectories, exact_error, exact_error_at, exact_value, prob_consistent, size_guard,
    state_marginals, Tabular, TrajectoryDist, WeightedTrajectory, BRANCH_LIMIT,
};
