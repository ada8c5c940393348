use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::regret::{check_grid, pathwise_regret, write_points_csv};
use super::scenario::ControlScenario;
use crate::entropy::{Distance, PackingSet};
use crate::error::{Error, Result};
use crate::identification::{least_squares_estimate, nearest_packing_point};
use crate::kernel::{sample_trajectory, SystemModel, Trajectory};
use crate::linalg::{add_outer, min_eigenvalue, spectral_norm};
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::MeanEstimate;

/// Relative slack allowed when comparing the two sides of the pathwise lemma.
pub const LEMMA_RELATIVE_TOLERANCE: f64 = 1e-12;

/// `lambda_min((1/T) sum_{t=1}^T Y_t Y_t^T)`.
pub fn normalized_gram_min_eigenvalue(trajectory: &Trajectory) -> Result<f64> {
    let t = trajectory.horizon();
    let ys = trajectory.real_outputs()?;
    let n = ys[0].len();
    let mut g = DMatrix::zeros(n, n);
    for y in &ys[..t] {
        add_outer(&mut g, y, y);
    }
    Ok(min_eigenvalue(&(g / t as f64)))
}

pub fn pe_event(trajectory: &Trajectory, c: f64) -> Result<bool> {
    Ok(normalized_gram_min_eigenvalue(trajectory)? >= c)
}

/// Probability that `lambda_min(G_T / T) >= c` for the scenario's constant `c`.
pub fn persistent_excitation_prob(
    scenario: &ControlScenario,
    model: &SystemModel,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    let a = model
        .system_matrix()
        .ok_or(Error::KindMismatch("linear_gaussian", model.kind().name()))?;
    let controller = scenario.controller.for_system(a);
    pe_probability(model, &controller, scenario.pe_constant, horizon, trials, seed)
}

fn pe_probability(
    model: &SystemModel,
    controller: &crate::kernel::ControllerPolicy,
    c: f64,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    if trials < 2 {
        return Err(Error::InvalidArgument("at least two trials are required".into()));
    }
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let tr = sample_trajectory(model, controller, horizon, derive_seed(seed, k as u64))?;
            pe_event(&tr, c)
        })
        .collect::<Result<_>>()?;
    Ok(MeanEstimate::proportion(hits.iter().filter(|h| **h).count(), trials))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PePoint {
    pub t: usize,
    pub probability: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeCurve {
    pub model_id: usize,
    pub points: Vec<PePoint>,
    /// Smallest tested horizon whose probability reaches `1 - delta`.
    pub t0: Option<usize>,
}

impl PeCurve {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_points_csv(
            out,
            self.points.iter().map(|p| (p.t, p.probability, p.std_error)),
            "probability",
        )
    }
}

/// Excitation probability of system `i` at each grid horizon.
pub fn pe_curve(
    scenario: &ControlScenario,
    i: usize,
    horizons: &[usize],
    trials: usize,
    seed: u64,
) -> Result<PeCurve> {
    check_grid(horizons)?;
    let model = scenario.model(i)?;
    let points: Vec<PePoint> = horizons
        .iter()
        .enumerate()
        .map(|(g, &t)| {
            let e = persistent_excitation_prob(scenario, &model, t, trials, derive_seed(seed, g as u64))?;
            Ok(PePoint {
                t,
                probability: e.mean,
                std_error: e.std_error,
            })
        })
        .collect::<Result<_>>()?;
    let t0 = points
        .iter()
        .find(|p| p.probability >= 1.0 - scenario.pe_confidence)
        .map(|p| p.t);
    Ok(PeCurve {
        model_id: i,
        points,
        t0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub pe_event_held: bool,
    pub lemma_held: bool,
    /// `||A_tilde - A||^2` in the spectral norm.
    pub lhs: f64,
    /// `(1 / cT) sum ||Y_{t+1} - V_{t+1}||^2`.
    pub rhs: f64,
}

/// Both sides of the pathwise least-squares error bound on one trajectory.
pub fn check_ident_lemma(trajectory: &Trajectory, true_a: &DMatrix<f64>, c: f64) -> Result<LemmaCheck> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("excitation constant must be positive, got {c}")));
    }
    let est = least_squares_estimate(trajectory)?;
    if est.shape() != true_a.shape() {
        return Err(Error::DimensionMismatch("estimate and system matrix differ in shape".into()));
    }
    let lhs = spectral_norm(&(est - true_a)).powi(2);
    let rhs = pathwise_regret(trajectory)? / (c * trajectory.horizon() as f64);
    let scale = 1.0 + spectral_norm(true_a).powi(2);
    Ok(LemmaCheck {
        pe_event_held: pe_event(trajectory, c)?,
        lemma_held: lhs <= rhs * (1.0 + LEMMA_RELATIVE_TOLERANCE) + LEMMA_RELATIVE_TOLERANCE * scale,
        lhs,
        rhs,
    })
}

/// Maximal spectral-norm packing of the unit ball at separation `4 sqrt(eps / c)`.
pub fn estimator_packing(dimension: usize, epsilon: f64, c: f64, resolution: f64) -> Result<PackingSet> {
    let sep = 4.0 * (epsilon / c).sqrt();
    let space = crate::entropy::MetricSpaceSpec::spectral_ball(dimension, resolution)?;
    crate::entropy::greedy_packing(&space, sep, 0)
}

/// `P(W_hat != W)` for `W` uniform over the scenario's systems and `W_hat`
/// the packing point nearest to the least-squares estimate.
pub fn estimator_error_prob(
    scenario: &ControlScenario,
    epsilon: f64,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    if trials < 2 {
        return Err(Error::InvalidArgument("at least two trials are required".into()));
    }
    let required = 4.0 * (epsilon / scenario.pe_constant).sqrt();
    let packing = PackingSet::from_points(scenario.systems.clone(), Distance::SpectralNormMatrix)?;
    if packing.len() > 1 && packing.separation() < required * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "systems are {} apart, below the required separation {required}",
            packing.separation()
        )));
    }
    let models: Vec<SystemModel> = (0..packing.len()).map(|i| scenario.model(i)).collect::<Result<_>>()?;
    let wrong: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let s = derive_seed(seed, k as u64);
            let w = rng_from_seed(s ^ 0xa5a5_5a5a_0f0f_f0f0).random_range(0..models.len());
            let tr = sample_trajectory(&models[w], &scenario.controller_for(w), horizon, s)?;
            let est = least_squares_estimate(&tr)?;
            Ok(nearest_packing_point(&est, &packing)? != w)
        })
        .collect::<Result<_>>()?;
    Ok(MeanEstimate::proportion(wrong.iter().filter(|x| **x).count(), trials))
}
