//! Linear multiclass policies, their logistic trainer, and bagged committees.

mod committee;
mod dataset;
mod linear;
mod train;

pub use committee::{bootstrap_committee, bootstrap_indices, committee_or_cold, Committee};
pub use dataset::Dataset;
pub use linear::{argmax, softmax, LinearPolicy};
pub use train::{
    objective_and_gradient, train_logistic, train_logistic_with_report, TrainConfig, TrainReport,
};
