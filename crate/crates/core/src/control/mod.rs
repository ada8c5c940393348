//! Regret, persistent excitation, and minimum-time experiments for
//! adaptively controlled linear systems.

mod excitation;
mod mintime;
mod regret;
mod scenario;

pub use excitation::{
    check_ident_lemma, estimator_error_prob, estimator_packing, normalized_gram_min_eigenvalue, pe_curve, pe_event,
    persistent_excitation_prob, LemmaCheck, PeCurve, PePoint, LEMMA_RELATIVE_TOLERANCE,
};
pub use mintime::{min_time_empirical, min_time_lower_bound, min_time_sweep, MinTime};
pub use regret::{pathwise_regret, regret_curve, regret_increments, scenario_regret_curves, RegretCurve, RegretPoint};
pub use scenario::{ControlScenario, ScenarioController};
