use rayon::prelude::*;
use serde::Serialize;

use super::divergence::StepEstimate;
use super::verify::Method;
use crate::entropy::{critical_separation, entropy_curve, exact_entropy_curve, EntropyCurve, MetricSpaceSpec};
use crate::error::{Error, Result};
use crate::identification::{exact_minimax_metric_error, exhaustive_optimal_error, Identifier};
use crate::kernel::{
    enumerate_paths, kernel_divergence, sample_trajectory, ControllerPolicy, Hypotheses, ModelFamily, ENUMERATION_BUDGET,
};
use crate::rng::derive_seed;
use crate::stats::MeanEstimate;
use crate::Point;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem2Report {
    /// Upper bounds `delta_t` on the plug-in divergence of each step.
    pub deltas: Vec<StepEstimate>,
    pub budget: f64,
    pub target_entropy: f64,
    pub sigma: f64,
    pub bracket: Option<(f64, f64)>,
    /// `sigma / 4`.
    pub floor: f64,
    pub curve: EntropyCurve,
    pub method: Method,
    /// Exact minimax metric error, when the uncertainty set is finite.
    pub minimax_error: Option<f64>,
    /// Uniform-prior optimal metric error, a lower bound on `minimax_error`.
    pub bayes_metric_error: Option<f64>,
}

/// Inputs of the Monte-Carlo pipeline.
#[derive(Debug, Clone, Copy)]
pub struct Theorem2Setup<'a> {
    pub family: &'a ModelFamily,
    /// Candidate set whose entropy curve is inverted.
    pub space: &'a MetricSpaceSpec,
    /// Parameters over which the supremum defining `delta_t` is taken.
    pub probes: &'a [Point],
    pub epsilons: &'a [f64],
}

fn plug_in_divergence(
    family: &ModelFamily,
    model: &crate::kernel::SystemModel,
    plug_in: &Identifier,
    history: crate::kernel::HistoryView<'_>,
) -> Result<f64> {
    let q = family.instantiate(&plug_in.estimate(history)?.point)?;
    kernel_divergence(model, &q, history)
}

/// Monte-Carlo critical-separation floor. Each `delta_t` is the largest,
/// over probes, of the mean plug-in divergence plus three standard errors.
pub fn theorem2_pipeline(
    setup: Theorem2Setup<'_>,
    controller: &ControllerPolicy,
    plug_in: &Identifier,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<Theorem2Report> {
    if setup.probes.is_empty() {
        return Err(Error::InvalidArgument("no probe parameters".into()));
    }
    if trials < 2 || horizon == 0 {
        return Err(Error::InvalidArgument("need at least two trials and one step".into()));
    }
    let mut deltas = vec![
        StepEstimate {
            t: 0,
            estimate: f64::NEG_INFINITY,
            std_error: 0.0
        };
        horizon
    ];
    for (i, theta) in setup.probes.iter().enumerate() {
        let model = setup.family.instantiate(theta)?;
        let probe_seed = derive_seed(seed, i as u64);
        let rows: Vec<Vec<f64>> = (0..trials)
            .into_par_iter()
            .map(|k| {
                let tr = sample_trajectory(&model, controller, horizon, derive_seed(probe_seed, k as u64))?;
                (1..=horizon)
                    .map(|s| plug_in_divergence(setup.family, &model, plug_in, tr.prefix(s)))
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (s, d) in deltas.iter_mut().enumerate() {
            let col: Vec<f64> = rows.iter().map(|r| r[s]).collect();
            let e = MeanEstimate::from_samples(&col);
            let upper = e.mean + 3.0 * e.std_error;
            if upper > d.estimate {
                *d = StepEstimate {
                    t: s + 2,
                    estimate: upper,
                    std_error: e.std_error,
                };
            }
        }
    }
    let curve = entropy_curve(setup.space, setup.epsilons, 0)?;
    finish(deltas, curve, Method::MonteCarlo, None, None)
}

fn finish(
    deltas: Vec<StepEstimate>,
    curve: EntropyCurve,
    method: Method,
    minimax_error: Option<f64>,
    bayes_metric_error: Option<f64>,
) -> Result<Theorem2Report> {
    let budget: f64 = deltas.iter().map(|d| d.estimate).sum();
    let c = critical_separation(&curve, budget)?;
    Ok(Theorem2Report {
        deltas,
        budget,
        target_entropy: c.target_entropy,
        sigma: c.sigma,
        bracket: c.bracket,
        floor: c.sigma / 4.0,
        curve,
        method,
        minimax_error,
        bayes_metric_error,
    })
}

/// Exact pipeline on tabular hypotheses, taking the uncertainty set to be
/// the hypotheses themselves. Also reports the exact minimax metric error
/// the floor bounds.
pub fn theorem2_exact(
    hyp: &Hypotheses,
    controller: &ControllerPolicy,
    plug_in: &Identifier,
    horizon: usize,
) -> Result<Theorem2Report> {
    let tree = enumerate_paths(hyp.models(), controller, horizon, ENUMERATION_BUDGET)?;
    let n = hyp.len();
    let mut deltas = Vec::with_capacity(horizon);
    for (s, level) in tree.levels.iter().enumerate() {
        let mut per_model = vec![0.0; n];
        for node in level {
            for (i, acc) in per_model.iter_mut().enumerate() {
                let w = node.weights[i];
                if w > 0.0 {
                    *acc += w * plug_in_divergence(hyp.family(), hyp.model(i), plug_in, node.history())?;
                }
            }
        }
        deltas.push(StepEstimate {
            t: s + 2,
            estimate: per_model.into_iter().fold(0.0, f64::max),
            std_error: 0.0,
        });
    }
    let curve = exact_entropy_curve(hyp.points(), hyp.packing().distance())?;
    let minimax = exact_minimax_metric_error(hyp, controller, horizon)?;
    let bayes = exhaustive_optimal_error(hyp, controller, horizon)?;
    finish(
        deltas,
        curve,
        Method::Exact,
        Some(minimax.value),
        Some(bayes.min_avg_metric_error),
    )
}
