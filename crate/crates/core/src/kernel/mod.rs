//! System models, controllers, their interconnection, and per-step divergences.

mod controller;
mod divergence;
mod enumerate;
mod family;
mod model;
mod trajectory;

pub use controller::{
    certainty_equivalence_controller, dither_value, regression_estimate, CertaintyEquivalence, ControllerPolicy,
    GainSchedule, TabularPolicy, DITHER_FOLD_THRESHOLD, GRAM_SINGULARITY_TOLERANCE,
};
pub use divergence::{
    conditional_log_density, discrete_kl, expected_divergence, gaussian_kl, gaussian_log_density, kernel_divergence,
};
pub use enumerate::{enumerate_paths, PathNode, PathTree, ENUMERATION_BUDGET};
pub use family::{Hypotheses, ModelFamily};
pub use model::{Feature, InitialLaw, LinearGaussian, ModelKind, ScalarNonlinear, SystemModel, Tabular};
pub use trajectory::{sample_trajectory, HistoryView, Obs, Trajectory};
