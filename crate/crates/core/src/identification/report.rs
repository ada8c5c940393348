use rayon::prelude::*;
use serde::Serialize;

use super::identifier::Identifier;
use crate::error::{Error, Result};
use crate::kernel::{enumerate_paths, sample_trajectory, ControllerPolicy, Hypotheses, HistoryView, ENUMERATION_BUDGET};
use crate::rng::derive_seed;
use crate::stats::MeanEstimate;

/// Identification error of one identifier over a finite hypothesis set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdErrorReport {
    /// `E rho(theta_hat, theta_i)` per hypothesis.
    pub per_model_error: Vec<MeanEstimate>,
    /// `P_i(theta_hat != theta_i)` per hypothesis.
    pub per_model_error_prob: Vec<f64>,
    pub per_model_error_prob_std_error: Vec<f64>,
    /// Largest mean metric error.
    pub worst_case: f64,
    pub max_error_prob: f64,
    pub min_success_prob: f64,
    /// Error probability with the hypothesis drawn uniformly.
    pub average_error_prob: f64,
}

impl IdErrorReport {
    fn assemble(per_model_error: Vec<MeanEstimate>, probs: Vec<MeanEstimate>) -> Self {
        let worst_case = per_model_error.iter().map(|e| e.mean).fold(0.0, f64::max);
        let max_error_prob = probs.iter().map(|e| e.mean).fold(0.0, f64::max);
        let average_error_prob = probs.iter().map(|e| e.mean).sum::<f64>() / probs.len() as f64;
        IdErrorReport {
            per_model_error,
            per_model_error_prob: probs.iter().map(|e| e.mean).collect(),
            per_model_error_prob_std_error: probs.iter().map(|e| e.std_error).collect(),
            worst_case,
            max_error_prob,
            min_success_prob: 1.0 - max_error_prob,
            average_error_prob,
        }
    }
}

/// Outcome of applying `identifier` to a history generated by hypothesis `i`:
/// metric error and whether the estimate differs from `theta_i`.
fn score(
    identifier: &Identifier,
    hyp: &Hypotheses,
    i: usize,
    history: HistoryView<'_>,
) -> Result<(f64, bool)> {
    let e = identifier.estimate(history)?;
    let truth = &hyp.points()[i];
    if e.point.shape() != truth.shape() {
        return Err(Error::DimensionMismatch(format!(
            "{} produced shape {:?}, hypotheses have {:?}",
            identifier.name(),
            e.point.shape(),
            truth.shape()
        )));
    }
    let wrong = match e.index {
        Some(j) => j != i,
        None => e.point != *truth,
    };
    Ok((hyp.packing().distance().eval(&e.point, truth), wrong))
}

/// Monte-Carlo identification error of `identifier` under each hypothesis.
pub fn empirical_id_report(
    hyp: &Hypotheses,
    controller: &ControllerPolicy,
    identifier: &Identifier,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<IdErrorReport> {
    if trials < 2 {
        return Err(Error::InvalidArgument("at least two trials are required".into()));
    }
    let mut errors = Vec::with_capacity(hyp.len());
    let mut probs = Vec::with_capacity(hyp.len());
    for i in 0..hyp.len() {
        let model_seed = derive_seed(seed, i as u64);
        let outcomes: Vec<(f64, bool)> = (0..trials)
            .into_par_iter()
            .map(|k| {
                let tr = sample_trajectory(hyp.model(i), controller, horizon, derive_seed(model_seed, k as u64))?;
                score(identifier, hyp, i, tr.history())
            })
            .collect::<Result<_>>()?;
        let dist: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
        errors.push(MeanEstimate::from_samples(&dist));
        probs.push(MeanEstimate::proportion(outcomes.iter().filter(|o| o.1).count(), trials));
    }
    Ok(IdErrorReport::assemble(errors, probs))
}

/// Exact identification error on tabular hypotheses by summing over all paths.
pub fn exact_tabular_report(
    hyp: &Hypotheses,
    controller: &ControllerPolicy,
    identifier: &Identifier,
    horizon: usize,
) -> Result<IdErrorReport> {
    let tree = enumerate_paths(hyp.models(), controller, horizon, ENUMERATION_BUDGET)?;
    let n = hyp.len();
    let mut err = vec![0.0; n];
    let mut prob = vec![0.0; n];
    for leaf in &tree.leaves {
        for i in 0..n {
            let w = leaf.weights[i];
            if w <= 0.0 {
                continue;
            }
            let (d, wrong) = score(identifier, hyp, i, leaf.history())?;
            err[i] += w * d;
            if wrong {
                prob[i] += w;
            }
        }
    }
    Ok(IdErrorReport::assemble(
        err.into_iter().map(MeanEstimate::exact).collect(),
        prob.into_iter().map(|p| MeanEstimate::exact(p.clamp(0.0, 1.0))).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{Distance, PackingSet};
    use crate::kernel::ModelFamily;
    use nalgebra::DMatrix;
    use std::sync::Arc;

    fn linear_hyp(values: &[f64]) -> Hypotheses {
        let pts = values.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect();
        Hypotheses::new(
            ModelFamily::linear(1, 1.0),
            PackingSet::from_points(pts, Distance::SpectralNormMatrix).unwrap(),
        )
        .unwrap()
    }

    fn tabular_hyp(tables: &[[f64; 2]]) -> Hypotheses {
        let pts = tables
            .iter()
            .map(|r| ModelFamily::tabular_point(&[r.to_vec(), r.to_vec()]))
            .collect();
        Hypotheses::new(
            ModelFamily::tabular(2, 1),
            PackingSet::from_points(pts, Distance::EuclideanVector).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn constant_guess_on_singleton() {
        let hyp = linear_hyp(&[0.3]);
        let id = Identifier::ConstantGuess(DMatrix::from_element(1, 1, 0.3));
        let r = empirical_id_report(&hyp, &ControllerPolicy::Zero, &id, 5, 10, 1).unwrap();
        assert_eq!(r.worst_case, 0.0);
        assert_eq!(r.min_success_prob, 1.0);
    }

    #[test]
    fn constant_guess_on_four_models() {
        let hyp = linear_hyp(&[-0.6, -0.2, 0.2, 0.6]);
        let id = Identifier::ConstantGuess(DMatrix::from_element(1, 1, -0.6));
        let r = empirical_id_report(&hyp, &ControllerPolicy::Zero, &id, 5, 10, 1).unwrap();
        assert_eq!(r.average_error_prob, 0.75);
        assert_eq!(r.max_error_prob + r.min_success_prob, 1.0);
        assert!((r.worst_case - 1.2).abs() < 1e-15);
    }

    #[test]
    fn disjoint_deterministic_tables_are_identified() {
        let hyp = Arc::new(tabular_hyp(&[[1.0, 0.0], [0.0, 1.0]]));
        let id = Identifier::ExhaustiveOptimal(hyp.clone());
        let r = exact_tabular_report(&hyp, &ControllerPolicy::Tabular(crate::kernel::TabularPolicy::constant(2)), &id, 2)
            .unwrap();
        assert_eq!(r.per_model_error_prob, vec![0.0, 0.0]);
    }

    #[test]
    fn empirical_matches_exact_on_small_tabular() {
        let hyp = Arc::new(tabular_hyp(&[[0.8, 0.2], [0.5, 0.5], [0.1, 0.9]]));
        let id = Identifier::ExhaustiveOptimal(hyp.clone());
        let c = ControllerPolicy::Tabular(crate::kernel::TabularPolicy::constant(2));
        let exact = exact_tabular_report(&hyp, &c, &id, 2).unwrap();
        let mc = empirical_id_report(&hyp, &c, &id, 2, 20_000, 5).unwrap();
        for i in 0..3 {
            let se = mc.per_model_error_prob_std_error[i].max(1e-3);
            assert!((mc.per_model_error_prob[i] - exact.per_model_error_prob[i]).abs() < 4.0 * se);
        }
    }
}
