use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::scenario::ControlScenario;
use crate::error::{Error, Result};
use crate::kernel::{sample_trajectory, ControllerPolicy, SystemModel, Trajectory};
use crate::rng::derive_seed;
use crate::stats::MeanEstimate;

/// `sum_{t=1}^T ||Y_{t+1} - V_{t+1}||^2` from the stored noise realizations.
pub fn pathwise_regret(trajectory: &Trajectory) -> Result<f64> {
    Ok(regret_increments(trajectory)?.iter().sum())
}

/// Per-step summands `||Y_{t+1} - V_{t+1}||^2`, `t = 1..T`.
pub fn regret_increments(trajectory: &Trajectory) -> Result<Vec<f64>> {
    let steps = trajectory.horizon();
    if trajectory.noises.len() != steps {
        return Err(Error::MissingRecord("noises"));
    }
    (0..steps)
        .map(|t| {
            let y = trajectory.outputs[t + 1]
                .as_real()
                .ok_or(Error::MissingRecord("real output"))?;
            Ok((y - &trajectory.noises[t]).norm_squared())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegretPoint {
    pub t: usize,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretCurve {
    pub model_id: usize,
    pub per_t: Vec<RegretPoint>,
}

impl RegretCurve {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_points_csv(out, self.per_t.iter().map(|p| (p.t, p.mean, p.std_error)), "mean")
    }
}

pub(crate) fn write_points_csv<W: Write>(
    out: W,
    rows: impl Iterator<Item = (usize, f64, f64)>,
    value: &str,
) -> Result<()> {
    let err = |e: csv::Error| Error::InvalidArgument(format!("csv export failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["T", value, "std_error"]).map_err(err)?;
    for (t, m, s) in rows {
        w.write_record([t.to_string(), m.to_string(), s.to_string()]).map_err(err)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv export failed: {e}")))?;
    Ok(())
}

pub(crate) fn check_grid(horizons: &[usize]) -> Result<()> {
    if horizons.is_empty() || horizons[0] == 0 || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "horizon grid must be nonempty, positive, and strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Regret `R_T` at each grid horizon. Every trajectory is drawn once at the
/// largest horizon and its prefix sums give all grid points, so each curve
/// is nondecreasing in `T`.
pub fn regret_curve(
    model: &SystemModel,
    controller: &ControllerPolicy,
    horizons: &[usize],
    trials: usize,
    seed: u64,
    model_id: usize,
) -> Result<RegretCurve> {
    check_grid(horizons)?;
    if trials < 2 {
        return Err(Error::InvalidArgument("at least two trials are required".into()));
    }
    let t_max = *horizons.last().unwrap();
    let rows: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let tr = sample_trajectory(model, controller, t_max, derive_seed(seed, k as u64))?;
            let inc = regret_increments(&tr)?;
            let mut acc = 0.0;
            let mut cum = Vec::with_capacity(t_max);
            for x in inc {
                acc += x;
                cum.push(acc);
            }
            Ok(horizons.iter().map(|&t| cum[t - 1]).collect())
        })
        .collect::<Result<_>>()?;
    let per_t = horizons
        .iter()
        .enumerate()
        .map(|(g, &t)| {
            let col: Vec<f64> = rows.iter().map(|r| r[g]).collect();
            let e = MeanEstimate::from_samples(&col);
            RegretPoint {
                t,
                mean: e.mean,
                std_error: e.std_error,
            }
        })
        .collect();
    Ok(RegretCurve { model_id, per_t })
}

/// Regret curves of every system in the scenario under its controller.
pub fn scenario_regret_curves(
    scenario: &ControlScenario,
    horizons: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<RegretCurve>> {
    (0..scenario.systems.len())
        .map(|i| {
            regret_curve(
                &scenario.model(i)?,
                &scenario.controller_for(i),
                horizons,
                trials,
                derive_seed(seed, i as u64),
                i,
            )
        })
        .collect()
}
