//! Fano's bound, divergence sums against auxiliary kernels, mutual
//! information, and the assembled lower bounds.

mod aux;
mod divergence;
mod fano;
mod theorem2;
mod verify;

pub use aux::AuxiliaryKernel;
pub use divergence::{
    divergence_sum, divergence_sum_exact, mutual_information_exact, mutual_information_mc, DivergenceSum, StepEstimate,
};
pub use fano::fano_lower_bound;
pub use theorem2::{theorem2_exact, theorem2_pipeline, Theorem2Report, Theorem2Setup};
pub use verify::{verify_meta_theorem, BoundReport, LhsComponents, Method, Verdict, EXACT_TOLERANCE};
