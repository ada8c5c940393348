use rayon::prelude::*;
use serde::Serialize;

use super::aux::AuxiliaryKernel;
use super::divergence::{divergence_sum, divergence_sum_exact, DivergenceSum, StepEstimate};
use crate::error::{Error, Result};
use crate::identification::Identifier;
use crate::kernel::{enumerate_paths, sample_trajectory, ControllerPolicy, Hypotheses, ENUMERATION_BUDGET};
use crate::rng::derive_seed;
use crate::stats::MeanEstimate;

/// Slack tolerated in exact verdicts, for floating-point summation.
pub const EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    HoldsWithinMcError,
    Violated,
}

impl Verdict {
    /// Process exit status for a run ending in this verdict.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Holds => 0,
            Verdict::HoldsWithinMcError => 2,
            Verdict::Violated => 3,
        }
    }

    /// The worse of two verdicts.
    pub fn combine(self, other: Verdict) -> Verdict {
        self.max(other)
    }

    pub fn from_slack(slack: f64, std_error: f64, exact: bool) -> Verdict {
        if exact {
            if slack >= -EXACT_TOLERANCE {
                Verdict::Holds
            } else {
                Verdict::Violated
            }
        } else if slack >= 0.0 {
            Verdict::Holds
        } else if slack >= -3.0 * std_error {
            Verdict::HoldsWithinMcError
        } else {
            Verdict::Violated
        }
    }
}

impl PartialOrd for Verdict {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Verdict {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.exit_code().cmp(&other.exit_code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LhsComponents {
    pub entropy_nats: f64,
    pub min_success_prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// Both sides of `log N * min_i P_i(theta_hat = theta_i) <= sum_t D(...) + log 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub verdict: Verdict,
    pub lhs_components: LhsComponents,
    pub per_step: Vec<StepEstimate>,
    pub combined_std_error: f64,
    pub method: Method,
    pub aux: &'static str,
    pub per_model_success_prob: Vec<f64>,
}

fn exact_success(hyp: &Hypotheses, controller: &ControllerPolicy, id: &Identifier, horizon: usize) -> Result<Vec<f64>> {
    let tree = enumerate_paths(hyp.models(), controller, horizon, ENUMERATION_BUDGET)?;
    let mut succ = vec![0.0; hyp.len()];
    for leaf in &tree.leaves {
        let j = id.packing_index(leaf.history(), hyp.packing())?;
        succ[j] += leaf.weights[j];
    }
    Ok(succ.into_iter().map(|p| p.clamp(0.0, 1.0)).collect())
}

fn mc_success(
    hyp: &Hypotheses,
    controller: &ControllerPolicy,
    id: &Identifier,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<MeanEstimate>> {
    (0..hyp.len())
        .map(|i| {
            let model_seed = derive_seed(seed, i as u64);
            let hits: Vec<bool> = (0..trials)
                .into_par_iter()
                .map(|k| {
                    let tr = sample_trajectory(hyp.model(i), controller, horizon, derive_seed(model_seed, k as u64))?;
                    Ok(id.packing_index(tr.history(), hyp.packing())? == i)
                })
                .collect::<Result<_>>()?;
            Ok(MeanEstimate::proportion(hits.iter().filter(|h| **h).count(), trials))
        })
        .collect()
}

fn exact_feasible(hyp: &Hypotheses, controller: &ControllerPolicy, horizon: usize) -> bool {
    hyp.is_tabular() && !matches!(
        enumerate_paths(hyp.models(), controller, horizon, ENUMERATION_BUDGET),
        Err(Error::BudgetExceeded { .. })
    )
}

/// Evaluates both sides of the Meta-Theorem for a packing, controller,
/// identifier valued in the packing, and auxiliary kernel. Tabular
/// instances within the enumeration budget are evaluated exactly.
pub fn verify_meta_theorem(
    hyp: &Hypotheses,
    controller: &ControllerPolicy,
    identifier: &Identifier,
    aux: &AuxiliaryKernel,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<BoundReport> {
    let entropy = hyp.entropy_nats();
    let exact = exact_feasible(hyp, controller, horizon);
    let (success, success_se, div): (Vec<f64>, Vec<f64>, DivergenceSum) = if exact {
        let s = exact_success(hyp, controller, identifier, horizon)?;
        let se = vec![0.0; s.len()];
        (s, se, divergence_sum_exact(hyp, controller, aux, horizon)?)
    } else {
        let s = mc_success(hyp, controller, identifier, horizon, trials, derive_seed(seed, 1))?;
        let div = divergence_sum(hyp, controller, aux, horizon, trials, derive_seed(seed, 2))?;
        (s.iter().map(|e| e.mean).collect(), s.iter().map(|e| e.std_error).collect(), div)
    };
    let mut argmin = 0;
    for i in 1..success.len() {
        if success[i] < success[argmin] {
            argmin = i;
        }
    }
    let min_success = success[argmin];
    let lhs = entropy * min_success;
    let rhs = div.total + std::f64::consts::LN_2;
    let slack = rhs - lhs;
    let combined = (div.total_std_error.powi(2) + (entropy * success_se[argmin]).powi(2)).sqrt();
    Ok(BoundReport {
        lhs,
        rhs,
        slack,
        verdict: Verdict::from_slack(slack, combined, exact),
        lhs_components: LhsComponents {
            entropy_nats: entropy,
            min_success_prob: min_success,
        },
        per_step: div.per_step,
        combined_std_error: combined,
        method: if exact { Method::Exact } else { Method::MonteCarlo },
        aux: aux.name(),
        per_model_success_prob: success,
    })
}
