//! Identification algorithms and their exact or Monte-Carlo error.

mod identifier;
mod optimal;
mod report;

pub use identifier::{least_squares_estimate, nearest_packing_point, Estimate, Identifier};
pub use optimal::{
    exact_minimax_metric_error, exhaustive_optimal_error, MinimaxMetricError, OptimalErrorReport, MINIMAX_NODE_BUDGET,
};
pub use report::{empirical_id_report, exact_tabular_report, IdErrorReport};
