//! Packing sets, Kolmogorov entropy curves, and the critical separation.

mod critical;
mod curve;
mod packing;
mod space;

pub use critical::{critical_separation, entropy_cap_from_rates, target_entropy, CriticalSeparation, EntropyCap};
pub use curve::{entropy_curve, exact_entropy_curve, AffineFit, CurveSource, EntropyCurve, EntropySample};
pub use packing::{best_greedy_packing, greedy_packing, max_packing, packing_number, PackingSet};
pub use space::{Distance, MetricSpaceSpec};
