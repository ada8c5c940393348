use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::entropy::PackingSet;
use crate::error::{Error, Result};
use crate::kernel::{conditional_log_density, regression_estimate, Hypotheses, HistoryView, Obs, SystemModel};
use crate::linalg::{add_outer, guarded_inverse};
use crate::kernel::GRAM_SINGULARITY_TOLERANCE;
use crate::Point;

/// Deterministic map from an input-output history to a parameter estimate.
#[derive(Debug, Clone)]
pub enum Identifier {
    /// `sum_t F_t Y_t Y_t^T G_T^{-1}` from the recorded gains.
    LeastSquares,
    /// Ordinary least squares of `Y_{t+1} - U_t` on `Y_t`.
    RegressionLeastSquares,
    /// Add-one smoothed transition frequencies of a tabular model.
    EmpiricalFrequency { alphabet: usize, inputs: usize },
    NearestPackingPoint { base: Box<Identifier>, packing: PackingSet },
    ConstantGuess(Point),
    /// Entry `s - 1` is applied to histories with `s` outputs; the last entry
    /// serves all longer histories.
    PlugInSequence(Vec<Identifier>),
    /// Maximum likelihood over the hypotheses, lowest index on ties.
    ExhaustiveOptimal(Arc<Hypotheses>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub point: Point,
    /// Position in the packing when the estimate is known to be a member.
    pub index: Option<usize>,
}

impl Estimate {
    fn free(point: Point) -> Self {
        Estimate { point, index: None }
    }
}

impl Identifier {
    pub fn name(&self) -> &'static str {
        match self {
            Identifier::LeastSquares => "least_squares",
            Identifier::RegressionLeastSquares => "regression_least_squares",
            Identifier::EmpiricalFrequency { .. } => "empirical_frequency",
            Identifier::NearestPackingPoint { .. } => "nearest_packing_point",
            Identifier::ConstantGuess(_) => "constant_guess",
            Identifier::PlugInSequence(_) => "plug_in_sequence",
            Identifier::ExhaustiveOptimal(_) => "exhaustive_optimal",
        }
    }

    pub fn nearest(base: Identifier, packing: PackingSet) -> Self {
        Identifier::NearestPackingPoint {
            base: Box::new(base),
            packing,
        }
    }

    pub fn estimate(&self, history: HistoryView<'_>) -> Result<Estimate> {
        match self {
            Identifier::LeastSquares => least_squares_from_history(history).map(Estimate::free),
            Identifier::RegressionLeastSquares => {
                let outputs = reals(history.outputs)?;
                let inputs = reals(history.inputs)?;
                let n = outputs.first().map_or(0, |y| y.len());
                let a = regression_estimate(&outputs, &inputs).unwrap_or_else(|| DMatrix::zeros(n, n));
                Ok(Estimate::free(a))
            }
            Identifier::EmpiricalFrequency { alphabet, inputs } => {
                empirical_frequency(history, *alphabet, *inputs).map(Estimate::free)
            }
            Identifier::NearestPackingPoint { base, packing } => {
                let e = base.estimate(history)?;
                let i = nearest_packing_point(&e.point, packing)?;
                Ok(Estimate {
                    point: packing.points()[i].clone(),
                    index: Some(i),
                })
            }
            Identifier::ConstantGuess(p) => Ok(Estimate::free(p.clone())),
            Identifier::PlugInSequence(seq) => {
                let Some(last) = seq.last() else {
                    return Err(Error::InvalidArgument("plug-in schedule is empty".into()));
                };
                let s = history.outputs.len().max(1);
                seq.get(s - 1).unwrap_or(last).estimate(history)
            }
            Identifier::ExhaustiveOptimal(hyp) => {
                let i = maximum_likelihood(hyp.models(), history)?;
                Ok(Estimate {
                    point: hyp.points()[i].clone(),
                    index: Some(i),
                })
            }
        }
    }

    /// Estimate as a packing index: the recorded one, or the member equal to the point.
    pub fn packing_index(&self, history: HistoryView<'_>, packing: &PackingSet) -> Result<usize> {
        let e = self.estimate(history)?;
        match e.index {
            Some(i) if i < packing.len() && packing.points()[i] == e.point => Ok(i),
            _ => packing.position(&e.point).ok_or(Error::OutsidePacking),
        }
    }
}

fn reals(obs: &[Obs]) -> Result<Vec<DVector<f64>>> {
    obs.iter()
        .map(|o| o.as_real().cloned().ok_or(Error::KindMismatch("real-valued observation", "symbol")))
        .collect()
}

fn least_squares_from_history(history: HistoryView<'_>) -> Result<DMatrix<f64>> {
    let steps = history.inputs.len();
    if history.gains.len() < steps {
        return Err(Error::MissingRecord("gains"));
    }
    let outputs = reals(&history.outputs[..steps.min(history.outputs.len())])?;
    let n = outputs
        .first()
        .map(|y| y.len())
        .ok_or(Error::EmptyHistory)?;
    let mut gram = DMatrix::zeros(n, n);
    let mut cross = DMatrix::zeros(n, n);
    for (y, f) in outputs.iter().zip(history.gains) {
        add_outer(&mut gram, y, y);
        cross += f * y * y.transpose();
    }
    Ok(match guarded_inverse(&gram, GRAM_SINGULARITY_TOLERANCE) {
        Some(inv) => cross * inv,
        None => DMatrix::zeros(n, n),
    })
}

/// `sum_t F_t Y_t Y_t^T G_T^{-1}`, or zero when `G_T` is numerically singular.
pub fn least_squares_estimate(trajectory: &crate::kernel::Trajectory) -> Result<DMatrix<f64>> {
    least_squares_from_history(trajectory.history())
}

fn empirical_frequency(history: HistoryView<'_>, alphabet: usize, inputs: usize) -> Result<Point> {
    let mut counts = vec![vec![1.0; alphabet]; alphabet * inputs];
    let steps = history.inputs.len().min(history.outputs.len().saturating_sub(1));
    for t in 0..steps {
        let sym = |o: &Obs, size: usize| -> Result<usize> {
            let s = o
                .as_symbol()
                .ok_or(Error::KindMismatch("tabular_finite", "real-valued observation"))?;
            if s >= size {
                return Err(Error::SymbolOutOfRange { symbol: s, size });
            }
            Ok(s)
        };
        let y = sym(&history.outputs[t], alphabet)?;
        let u = sym(&history.inputs[t], inputs)?;
        let next = sym(&history.outputs[t + 1], alphabet)?;
        counts[y * inputs + u][next] += 1.0;
    }
    let rows: Vec<Vec<f64>> = counts
        .into_iter()
        .map(|c| {
            let total: f64 = c.iter().sum();
            c.into_iter().map(|x| x / total).collect()
        })
        .collect();
    Ok(crate::kernel::ModelFamily::tabular_point(&rows))
}

fn maximum_likelihood(models: &[SystemModel], history: HistoryView<'_>) -> Result<usize> {
    let steps = history.inputs.len().min(history.outputs.len().saturating_sub(1));
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, m) in models.iter().enumerate() {
        let score = match m {
            // Products keep exact ties between identical tables.
            SystemModel::Tabular(_) => {
                let mut p = 1.0;
                for s in 1..=steps {
                    let h = HistoryView::new(&history.outputs[..s], &history.inputs[..s]);
                    p *= conditional_log_density(m, &history.outputs[s], h)?.exp();
                }
                p
            }
            _ => {
                let mut ll = 0.0;
                for s in 1..=steps {
                    let h = HistoryView::new(&history.outputs[..s], &history.inputs[..s]);
                    ll += conditional_log_density(m, &history.outputs[s], h)?;
                }
                ll
            }
        };
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    Ok(best)
}

/// Index of the packing point closest to `estimate`, lowest index on ties.
pub fn nearest_packing_point(estimate: &Point, packing: &PackingSet) -> Result<usize> {
    if packing.is_empty() {
        return Err(Error::InvalidArgument("packing is empty".into()));
    }
    if estimate.shape() != packing.points()[0].shape() {
        return Err(Error::DimensionMismatch(format!(
            "estimate has shape {:?}, packing points {:?}",
            estimate.shape(),
            packing.points()[0].shape()
        )));
    }
    Ok(packing.nearest(estimate))
}
