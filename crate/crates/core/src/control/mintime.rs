use serde::Serialize;

use super::regret::{scenario_regret_curves, RegretCurve};
use super::scenario::ControlScenario;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinTime {
    pub epsilon: f64,
    /// `sup_A min{T in grid : R_T / T < eps}`; `None` when some system never gets there.
    pub time: Option<usize>,
    /// First grid horizon per system.
    pub per_model: Vec<Option<usize>>,
}

fn first_time(curve: &RegretCurve, epsilon: f64) -> Option<usize> {
    curve.per_t.iter().find(|p| p.mean / (p.t as f64) < epsilon).map(|p| p.t)
}

fn assemble(curves: &[RegretCurve], epsilon: f64) -> MinTime {
    let per_model: Vec<Option<usize>> = curves.iter().map(|c| first_time(c, epsilon)).collect();
    let time = per_model
        .iter()
        .try_fold(0usize, |acc, t| t.map(|t| acc.max(t)));
    MinTime {
        epsilon,
        time,
        per_model,
    }
}

/// Empirical minimum time from Monte-Carlo regret point estimates.
pub fn min_time_empirical(
    scenario: &ControlScenario,
    epsilon: f64,
    horizon_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<MinTime> {
    Ok(min_time_sweep(scenario, &[epsilon], horizon_grid, trials, seed)?.remove(0))
}

/// Minimum times for several `eps` from one set of regret curves, which
/// makes the result nonincreasing in `eps`.
pub fn min_time_sweep(
    scenario: &ControlScenario,
    epsilons: &[f64],
    horizon_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<MinTime>> {
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidArgument("regret levels must be positive".into()));
    }
    let curves = scenario_regret_curves(scenario, horizon_grid, trials, seed)?;
    Ok(epsilons.iter().map(|&e| assemble(&curves, e)).collect())
}

/// Explicit lower bound on the minimum time:
/// `(2 s2 / eps) [ (b_n + n^2 ln(1 / (4 sqrt(eps / c)))) / 2 - (C + n s2) / s2 - ln 2 ]`, clamped at 0.
pub fn min_time_lower_bound(n: usize, sigma2: f64, epsilon: f64, c: f64, big_c: f64, b_n: f64) -> Result<f64> {
    if n == 0 || !(sigma2 > 0.0) || !(epsilon > 0.0) || !(c > 0.0) || !(big_c >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need n >= 1 and positive sigma2, epsilon, c with C >= 0; got n = {n}, sigma2 = {sigma2}, \
             epsilon = {epsilon}, c = {c}, C = {big_c}"
        )));
    }
    let nf = n as f64;
    let entropy = 0.5 * (b_n + nf * nf * (1.0 / (4.0 * (epsilon / c).sqrt())).ln());
    let bracket = entropy - (big_c + nf * sigma2) / sigma2 - std::f64::consts::LN_2;
    Ok((2.0 * sigma2 / epsilon * bracket).max(0.0))
}
