use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::aux::{mixture_divergence, posterior, step_value, update_loglik, AuxiliaryKernel};
use crate::error::{Error, Result};
use crate::kernel::{enumerate_paths, kernel_divergence, sample_trajectory, ControllerPolicy, Hypotheses, ENUMERATION_BUDGET};
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::MeanEstimate;

/// Contribution of the kernel producing `Y_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepEstimate {
    pub t: usize,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceSum {
    pub per_step: Vec<StepEstimate>,
    pub total: f64,
    /// Standard error of the per-trial totals (zero when exact).
    pub total_std_error: f64,
}

const HYPOTHESIS_SALT: u64 = 0x5eed_0f_a11_c0de;

/// Hypothesis index and trajectory seed of trial `k`.
pub(crate) fn trial_draw(seed: u64, k: usize, n: usize) -> (usize, u64) {
    let s = derive_seed(seed, k as u64);
    let w = rng_from_seed(s ^ HYPOTHESIS_SALT).random_range(0..n);
    (w, s)
}

fn check(hyp: &Hypotheses, horizon: usize) -> Result<()> {
    if hyp.is_empty() {
        return Err(Error::InvalidArgument("no hypotheses".into()));
    }
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    Ok(())
}

/// Monte-Carlo estimate of `sum_t D(P_{Y_t|Z^{t-1},W} || Q_{Y_t|Z^{t-1}})` with `W` uniform.
pub fn divergence_sum(
    hyp: &Hypotheses,
    controller: &ControllerPolicy,
    aux: &AuxiliaryKernel,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<DivergenceSum> {
    check(hyp, horizon)?;
    aux.check(hyp)?;
    if trials < 2 {
        return Err(Error::InvalidArgument("at least two trials are required".into()));
    }
    let n = hyp.len();
    let mixture = matches!(aux, AuxiliaryKernel::ExactConditionalMixture);
    let rows: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let (w, s) = trial_draw(seed, k, n);
            let tr = sample_trajectory(hyp.model(w), controller, horizon, s)?;
            let mut loglik = vec![0.0; n];
            let mut vals = Vec::with_capacity(horizon);
            for step in 1..=horizon {
                let h = tr.prefix(step);
                let y_next = &tr.outputs[step];
                vals.push(step_value(aux, hyp, w, h, y_next, &loglik)?);
                if mixture {
                    update_loglik(hyp, h, y_next, &mut loglik)?;
                }
            }
            Ok(vals)
        })
        .collect::<Result<_>>()?;
    let per_step = (0..horizon)
        .map(|s| {
            let col: Vec<f64> = rows.iter().map(|r| r[s]).collect();
            let e = MeanEstimate::from_samples(&col);
            StepEstimate {
                t: s + 2,
                estimate: e.mean,
                std_error: e.std_error,
            }
        })
        .collect::<Vec<_>>();
    let totals: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
    let total = MeanEstimate::from_samples(&totals);
    Ok(DivergenceSum {
        per_step,
        total: total.mean,
        total_std_error: total.std_error,
    })
}

/// Exact divergence sum on tabular hypotheses by enumerating path prefixes.
pub fn divergence_sum_exact(
    hyp: &Hypotheses,
    controller: &ControllerPolicy,
    aux: &AuxiliaryKernel,
    horizon: usize,
) -> Result<DivergenceSum> {
    check(hyp, horizon)?;
    aux.check(hyp)?;
    let tree = enumerate_paths(hyp.models(), controller, horizon, ENUMERATION_BUDGET)?;
    let n = hyp.len();
    let mut per_step = Vec::with_capacity(horizon);
    for (s, level) in tree.levels.iter().enumerate() {
        let mut acc = 0.0;
        for node in level {
            let h = node.history();
            let mass: f64 = node.weights.iter().sum();
            let pi: Vec<f64> = node.weights.iter().map(|w| w / mass).collect();
            for w in 0..n {
                let weight = node.weights[w];
                if weight <= 0.0 {
                    continue;
                }
                let d = match aux {
                    AuxiliaryKernel::ExactConditionalMixture => mixture_divergence(hyp, w, h, &pi)?,
                    AuxiliaryKernel::Nominal(q) => kernel_divergence(hyp.model(w), q, h)?,
                    AuxiliaryKernel::PlugIn(id) => {
                        let q = hyp.family().instantiate(&id.estimate(h)?.point)?;
                        kernel_divergence(hyp.model(w), &q, h)?
                    }
                    AuxiliaryKernel::FixedGaussianZeroMean { .. } => unreachable!("rejected by check"),
                };
                acc += weight * d;
            }
        }
        per_step.push(StepEstimate {
            t: s + 2,
            estimate: acc / n as f64,
            std_error: 0.0,
        });
    }
    Ok(DivergenceSum {
        total: per_step.iter().map(|s| s.estimate).sum(),
        per_step,
        total_std_error: 0.0,
    })
}

/// Exact `I(W; Y^{T+1}, U^T)` in nats for `W` uniform over tabular hypotheses.
pub fn mutual_information_exact(hyp: &Hypotheses, controller: &ControllerPolicy, horizon: usize) -> Result<f64> {
    check(hyp, horizon)?;
    let tree = enumerate_paths(hyp.models(), controller, horizon, ENUMERATION_BUDGET)?;
    let n = hyp.len() as f64;
    let mut info = 0.0;
    for leaf in &tree.leaves {
        let mean = leaf.weights.iter().sum::<f64>() / n;
        for &w in &leaf.weights {
            if w > 0.0 {
                info += w / n * (w / mean).ln();
            }
        }
    }
    Ok(info.max(0.0))
}

/// Monte-Carlo `I(W; Z) = ln N - E[H(W | Z)]` from exact posteriors on sampled paths.
pub fn mutual_information_mc(
    hyp: &Hypotheses,
    controller: &ControllerPolicy,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    check(hyp, horizon)?;
    if trials < 2 {
        return Err(Error::InvalidArgument("at least two trials are required".into()));
    }
    let n = hyp.len();
    let ln_n = (n as f64).ln();
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let (w, s) = trial_draw(seed, k, n);
            let tr = sample_trajectory(hyp.model(w), controller, horizon, s)?;
            let mut loglik = vec![0.0; n];
            for step in 1..=horizon {
                update_loglik(hyp, tr.prefix(step), &tr.outputs[step], &mut loglik)?;
            }
            let h: f64 = posterior(&loglik)
                .iter()
                .filter(|p| **p > 0.0)
                .map(|p| -p * p.ln())
                .sum();
            Ok(ln_n - h)
        })
        .collect::<Result<_>>()?;
    Ok(MeanEstimate::from_samples(&samples))
}
