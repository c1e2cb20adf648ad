//! Synthetic data generation, deterministic trainers for the binary linear
//! model and small dense networks, and the bias / task-risk / surrogate-risk
//! evaluators.

mod adam;
mod dataset;
mod evaluate;
mod linear;
mod network;

pub use adam::{scheduled_lr, Adam};
pub use dataset::{
    gaussian_cluster_means, sample_contaminated, sample_gaussian_clusters, sample_nominal,
    ContaminationSpec, Dataset,
};
pub use evaluate::{eval_deviation, eval_sob, eval_tsr, eval_ttr, LinearModel, Predictor};
pub use linear::{empirical_risk, fit_linear, FitResult, OptimizerConfig};
pub use network::{fit_network, Activation, EpochEval, Network, NetworkArch, NetworkFit};
